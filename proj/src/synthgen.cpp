// Copyright 2026 The gesturespot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gesturespot/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>


#include "gesturespot/training.hpp"

namespace gesturespot {

namespace {

constexpr double kPi = std::numbers::pi;

double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

double triangle(double u) { return 1.0 - std::abs(2.0 * u - 1.0); }

// Finger geometry in the hand frame: knuckle x, knuckle y, spread sign,
// phalanx lengths.
struct FingerGeometry {
  double x, y, spread;
  std::array<double, 3> bones;
};

constexpr std::array<FingerGeometry, 4> kFingers = {{
    {0.024, 0.086, 0.18, {0.040, 0.024, 0.020}},
    {0.005, 0.089, 0.04, {0.045, 0.028, 0.021}},
    {-0.013, 0.084, -0.10, {0.042, 0.027, 0.020}},
    {-0.029, 0.076, -0.22, {0.033, 0.020, 0.018}},
}};

HandState with_curls(std::array<double, 5> curl, double opposition, double spread) {
  HandState s;
  s.curl = curl;
  s.opposition = opposition;
  s.spread = spread;
  return s;
}

const HandState& open_hand() {
  static const HandState s = with_curls({0.05, 0.02, 0.02, 0.02, 0.02}, 0.0, 0.8);
  return s;
}
const HandState& pointing_hand() {
  static const HandState s = with_curls({0.7, 0.02, 0.95, 0.95, 0.95}, 0.6, 0.4);
  return s;
}
const HandState& fist_hand() {
  static const HandState s = with_curls({0.6, 0.95, 0.95, 0.95, 0.95}, 0.7, 0.3);
  return s;
}
const HandState& claw_hand() {
  static const HandState s = with_curls({0.45, 0.45, 0.45, 0.45, 0.45}, 0.6, 0.6);
  return s;
}

HandState static_template(Label label) {
  switch (label) {
    case Label::kOne: return pointing_hand();
    case Label::kTwo: return with_curls({0.7, 0.02, 0.02, 0.95, 0.95}, 0.7, 0.9);
    case Label::kThree: return with_curls({0.05, 0.02, 0.02, 0.95, 0.95}, 0.0, 0.8);
    case Label::kFour: return with_curls({0.8, 0.02, 0.02, 0.02, 0.02}, 0.9, 0.7);
    case Label::kOk: return with_curls({0.45, 0.6, 0.05, 0.05, 0.05}, 0.75, 0.6);
    case Label::kMenu: return open_hand();
    default: return open_hand();
  }
}

void set_pose(HandState& s, const HandState& shape) {
  s.curl = shape.curl;
  s.opposition = shape.opposition;
  s.spread = shape.spread;
}

// Background wandering: each parameter is a mix of two slow sinusoids.
struct Wander {
  std::array<double, 2> period{}, phase{};
  double eval(double t) const {
    return 0.5 * (std::sin(2.0 * kPi * t / period[0] + phase[0]) + std::sin(2.0 * kPi * t / period[1] + phase[1]));
  }
};

struct BackgroundProcess {
  std::array<Wander, 13> w;
  std::array<Wander, 3> tremor;
  double scale = 1.0;

  explicit BackgroundProcess(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> period(40.0, 160.0), fast(10.0, 20.0), phase(0.0, 2.0 * kPi);
    for (auto& x : w)
      for (int k = 0; k < 2; ++k) {
        x.period[static_cast<std::size_t>(k)] = period(rng);
        x.phase[static_cast<std::size_t>(k)] = phase(rng);
      }
    for (auto& x : tremor)
      for (int k = 0; k < 2; ++k) {
        x.period[static_cast<std::size_t>(k)] = fast(rng);
        x.phase[static_cast<std::size_t>(k)] = phase(rng);
      }
    scale = std::uniform_real_distribution<double>(0.9, 1.1)(rng);
  }

  HandState at(double t) const {
    HandState s;
    s.curl[0] = 0.25 + 0.10 * w[0].eval(t);
    for (std::size_t f = 1; f < 5; ++f) s.curl[f] = 0.28 + 0.12 * w[f].eval(t);
    s.opposition = 0.3 + 0.15 * w[5].eval(t);
    s.spread = 0.5 + 0.2 * w[6].eval(t);
    s.roll = 0.2 * w[7].eval(t);
    s.pitch = 0.5 + 0.3 * w[8].eval(t);
    s.yaw = 0.3 * w[9].eval(t);
    s.position = Vec3(0.05 + 0.08 * w[10].eval(t), -0.12 + 0.06 * w[11].eval(t), 0.38 + 0.05 * w[12].eval(t));
    s.position += 0.004 * Vec3(tremor[0].eval(t), tremor[1].eval(t), tremor[2].eval(t));
    s.scale = scale;
    return s;
  }
};

}  // namespace

std::array<LengthRange, kNumGestureClasses> default_gesture_lengths() {
  return {{{21, 72}, {24, 59}, {15, 71}, {23, 69}, {22, 52}, {20, 59}, {11, 37}, {11, 32},
           {25, 64}, {17, 37}, {24, 50}, {19, 70}, {22, 61}, {31, 81}, {27, 73}, {37, 79}}};
}

void GenConfig::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::kInvalidArgument, m); };
  if (sequences < 1) bad("sequences must be at least 1");
  if (min_gestures < 0 || max_gestures < min_gestures) bad("gesture count range is empty");
  if (gap_min < 12 || gap_max < gap_min) bad("gap range must satisfy 12 <= gap_min <= gap_max");
  if (!(fps > 0.0) || !std::isfinite(fps)) bad("fps must be positive");
  if (!(timestamp_jitter_ms >= 0.0) || 1000.0 / fps - timestamp_jitter_ms < 2.0)
    bad("timestamp jitter too large for the frame rate");
  if (!(noise >= 0.0) || !std::isfinite(noise)) bad("noise must be non-negative");
  const int hold = static_cast<int>(std::ceil(0.5 * fps));
  int longest = 0;
  for (int c = 0; c < kNumGestureClasses; ++c) {
    const auto& r = lengths[static_cast<std::size_t>(c)];
    const std::string name(label_name(label_from_index(c)));
    if (r.min < 2 || r.max < r.min) bad("invalid length range for " + name);
    if (category_of(label_from_index(c)) == Category::kStatic && r.min < hold)
      bad("static gesture " + name + " must last at least " + std::to_string(hold) + " frames");
    longest = std::max(longest, r.max);
  }
  if (max_frames < 0) bad("max_frames must be non-negative");
  if (max_frames > 0) {
    const long long worst = static_cast<long long>(max_gestures) * longest + (max_gestures + 1LL) * gap_max;
    if (worst > max_frames)
      bad("sequence too short for requested gestures: up to " + std::to_string(worst) + " frames needed, max_frames " +
          std::to_string(max_frames));
  }
}

HandState lerp(const HandState& a, const HandState& b, double u) {
  HandState s;
  for (std::size_t i = 0; i < 5; ++i) s.curl[i] = a.curl[i] + u * (b.curl[i] - a.curl[i]);
  s.spread = a.spread + u * (b.spread - a.spread);
  s.opposition = a.opposition + u * (b.opposition - a.opposition);
  s.roll = a.roll + u * (b.roll - a.roll);
  s.pitch = a.pitch + u * (b.pitch - a.pitch);
  s.yaw = a.yaw + u * (b.yaw - a.yaw);
  s.position = a.position + u * (b.position - a.position);
  s.scale = a.scale + u * (b.scale - a.scale);
  return s;
}

Pose pose_hand(const HandState& s) {
  std::array<Vec3, kNumJoints> local;
  local[joint::kWrist] = Vec3::Zero();
  local[joint::kPalm] = Vec3(0.0, 0.045, 0.008);

  // Thumb swings from beside the index toward the palm as opposition grows.
  const Vec3 thumb_out(0.75, 0.6, 0.15), thumb_in(-0.35, 0.6, 0.7);
  const Vec3 d0 = (thumb_out + s.opposition * (thumb_in - thumb_out)).normalized();
  const Vec3 toward_palm = (Vec3(-0.6, 0.0, 0.8) - Vec3(-0.6, 0.0, 0.8).dot(d0) * d0).normalized();
  const std::array<double, 3> thumb_bones = {0.035, 0.032, 0.025};
  const std::array<double, 3> thumb_bend = {0.3, 0.7, 0.8};
  local[joint::kThumbMetacarpal] = Vec3(0.022, 0.012, 0.008);
  double angle = 0.0;
  for (int b = 0; b < 3; ++b) {
    angle += thumb_bend[static_cast<std::size_t>(b)] * s.curl[0];
    const Vec3 d = std::cos(angle) * d0 + std::sin(angle) * toward_palm;
    local[static_cast<std::size_t>(3 + b)] = local[static_cast<std::size_t>(2 + b)] + thumb_bones[static_cast<std::size_t>(b)] * d;
  }

  const std::array<double, 3> bend = {1.3, 1.6, 1.0};
  for (std::size_t f = 0; f < kFingers.size(); ++f) {
    const auto& g = kFingers[f];
    const std::size_t base = static_cast<std::size_t>(joint::kIndexMetacarpal) + 5 * f;
    const double sigma = g.spread * s.spread;
    const Vec3 dir(std::sin(sigma), std::cos(sigma), 0.0);
    local[base] = Vec3(0.45 * g.x, 0.012, 0.0);
    local[base + 1] = Vec3(g.x, g.y, 0.0);
    double a = 0.0;
    for (std::size_t b = 0; b < 3; ++b) {
      a += bend[b] * s.curl[f + 1];
      const Vec3 d = std::cos(a) * dir + std::sin(a) * Vec3::UnitZ();
      local[base + 2 + b] = local[base + 1 + b] + g.bones[b] * d;
    }
  }

  const Eigen::Matrix3d R = (Eigen::AngleAxisd(s.roll, Vec3::UnitZ()) * Eigen::AngleAxisd(s.pitch, Vec3::UnitX()) *
                             Eigen::AngleAxisd(s.yaw, Vec3::UnitY()))
                                .toRotationMatrix();
  Pose out;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = s.position + R * (s.scale * local[j]);
  return out;
}

HandState gesture_state(Label label, double u, const HandState& anchor, const GestureVariant& v) {
  HandState s;
  s.position = anchor.position;
  s.scale = anchor.scale;
  s.roll = v.roll_offset;
  s.pitch = v.pitch_offset;
  const double a = v.amplitude;
  const double osc = std::sin(2.0 * kPi * v.cycles * u);
  switch (label) {
    case Label::kOne:
    case Label::kTwo:
    case Label::kThree:
    case Label::kFour:
    case Label::kOk:
      set_pose(s, static_template(label));
      s.pitch += 0.25;
      break;
    case Label::kMenu:
      set_pose(s, open_hand());
      s.roll += 2.6;
      s.pitch += 0.25;
      break;
    case Label::kLeft:
    case Label::kRight: {
      const double sign = label == Label::kLeft ? 1.0 : -1.0;
      set_pose(s, open_hand());
      s.curl[0] = 0.1;
      s.pitch += 1.3;
      s.roll += 0.6 * a * sign * std::sin(kPi * u);
      s.position -= sign * 0.22 * a * smoothstep(u) * v.direction;
      break;
    }
    case Label::kCircle:
      set_pose(s, pointing_hand());
      s.pitch += 0.9 + 0.3 * a * (std::cos(2.0 * kPi * u) - 1.0);
      s.roll += 0.4 * a * std::sin(2.0 * kPi * u);
      s.position += 0.08 * a * Vec3(std::sin(2.0 * kPi * u), std::cos(2.0 * kPi * u) - 1.0, 0.0);
      break;
    case Label::kV:
      set_pose(s, pointing_hand());
      s.pitch += 0.9 - 0.5 * a * triangle(u);
      s.roll += 0.45 * a * (u - 0.5);
      s.position += a * Vec3(0.15 * (u - 0.5), -0.12 * triangle(u), 0.0);
      break;
    case Label::kCross: {
      set_pose(s, pointing_hand());
      double roll = 0.0, pitch = 0.0;
      if (u < 0.45) {
        const double t = u / 0.45;
        roll = -0.35 + 0.7 * t;
        pitch = 0.35 - 0.7 * t;
      } else if (u < 0.55) {
        const double t = (u - 0.45) / 0.1;
        roll = 0.35;
        pitch = -0.35 + 0.7 * t;
      } else {
        const double t = (u - 0.55) / 0.45;
        roll = 0.35 - 0.7 * t;
        pitch = 0.35 - 0.7 * t;
      }
      s.pitch += 0.9 + a * pitch;
      s.roll += a * roll;
      s.position += 0.2 * a * Vec3(roll, pitch, 0.0);
      break;
    }
    case Label::kGrab:
      set_pose(s, lerp(open_hand(), fist_hand(), smoothstep(u / 0.6)));
      s.pitch += 0.6;
      break;
    case Label::kPinch: {
      const HandState from = with_curls({0.1, 0.15, 0.55, 0.55, 0.55}, 0.3, 0.5);
      const HandState to = with_curls({0.45, 0.62, 0.55, 0.55, 0.55}, 0.85, 0.5);
      set_pose(s, lerp(from, to, smoothstep(u / 0.6)));
      s.pitch += 0.5;
      s.roll += 0.3;
      break;
    }
    case Label::kDeny:
      set_pose(s, pointing_hand());
      s.pitch += 0.9;
      s.roll += 0.45 * a * osc;
      break;
    case Label::kWave:
      set_pose(s, open_hand());
      s.roll += 0.5 * a * osc;
      s.position += 0.04 * a * osc * Vec3::UnitX();
      break;
    case Label::kKnob:
      set_pose(s, claw_hand());
      s.pitch += 1.4;
      s.yaw = 0.7 * a * osc;
      break;
    case Label::kNonGesture:
      throw Error(ErrorKind::kInvalidArgument, "NON_GESTURE has no gesture trajectory");
  }
  return s;
}

GeneratedSequence generate_sequence(const std::string& id, std::span<const Label> gestures, const GenConfig& config,
                                    std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  const BackgroundProcess bg(rng);
  auto uniform_int = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  struct Planned {
    GestureInterval interval;
    GestureVariant variant;
  };
  std::vector<Planned> plan;
  int t = uniform_int(config.gap_min, config.gap_max);
  for (Label l : gestures) {
    if (!is_gesture(l)) throw Error(ErrorKind::kInvalidArgument, "cannot generate a NON_GESTURE gesture");
    const auto& r = config.lengths[static_cast<std::size_t>(index_of(l))];
    Planned p;
    p.interval.label = l;
    p.interval.start = t;
    p.interval.end = t + uniform_int(r.min, r.max) - 1;
    p.variant.amplitude = uniform(0.8, 1.2);
    p.variant.roll_offset = uniform(-0.1, 0.1);
    p.variant.pitch_offset = uniform(-0.1, 0.1);
    p.variant.cycles = std::max(2, p.interval.length() / uniform_int(12, 18));
    const double heading = uniform(-0.3, 0.3);
    p.variant.direction = Vec3(std::cos(heading), 0.0, std::sin(heading));
    plan.push_back(p);
    t = p.interval.end + 1 + uniform_int(config.gap_min, config.gap_max);
  }
  const int total = t;

  std::vector<HandState> states(static_cast<std::size_t>(total));
  auto gesture_at = [&](const Planned& p, int frame) {
    const int len = p.interval.length();
    const double u = len > 1 ? static_cast<double>(frame - p.interval.start) / (len - 1) : 0.0;
    return gesture_state(p.interval.label, u, bg.at(p.interval.start), p.variant);
  };
  for (std::size_t g = 0; g < plan.size(); ++g)
    for (int f = plan[g].interval.start; f <= plan[g].interval.end; ++f)
      states[static_cast<std::size_t>(f)] = gesture_at(plan[g], f);

  // Background gaps blend out of the previous gesture and into the next one.
  for (std::size_t g = 0; g <= plan.size(); ++g) {
    const int a = g == 0 ? 0 : plan[g - 1].interval.end + 1;
    const int b = g == plan.size() ? total - 1 : plan[g].interval.start - 1;
    const int blend = std::min(8, (b - a + 1) / 3);
    std::optional<HandState> from, to;
    if (g > 0) from = gesture_at(plan[g - 1], plan[g - 1].interval.end);
    if (g < plan.size()) to = gesture_at(plan[g], plan[g].interval.start);
    for (int f = a; f <= b; ++f) {
      HandState s = bg.at(f);
      if (from && f - a < blend) s = lerp(*from, s, smoothstep(static_cast<double>(f - a + 1) / (blend + 1)));
      if (to && b - f < blend) s = lerp(*to, s, smoothstep(static_cast<double>(b - f + 1) / (blend + 1)));
      states[static_cast<std::size_t>(f)] = s;
    }
  }

  GeneratedSequence out;
  out.seed = seed;
  out.sequence.id = id;
  out.sequence.frames.resize(static_cast<std::size_t>(total));
  std::normal_distribution<double> noise(0.0, 1.0);
  const double dt = 1000.0 / config.fps;
  double clock = 0.0;
  for (int f = 0; f < total; ++f) {
    auto& frame = out.sequence.frames[static_cast<std::size_t>(f)];
    if (f > 0) clock += dt + uniform(-config.timestamp_jitter_ms, config.timestamp_jitter_ms);
    frame.timestamp_ms = std::llround(clock);
    frame.joints = pose_hand(states[static_cast<std::size_t>(f)]);
    if (config.noise > 0.0)
      for (auto& j : frame.joints)
        for (int c = 0; c < 3; ++c) j[c] += config.noise * noise(rng);
  }
  for (const auto& p : plan) out.gestures.push_back(p.interval);
  return out;
}

GeneratedDataset generate_dataset(const GenConfig& config) {
  config.validate();
  std::mt19937_64 rng(derive_seed(config.seed, 0));
  const int n = config.sequences;
  const long long target_total = std::llround(n * (config.min_gestures + config.max_gestures) / 2.0);

  std::vector<int> counts(static_cast<std::size_t>(n));
  std::uniform_int_distribution<int> count_dist(config.min_gestures, config.max_gestures);
  long long sum = 0;
  for (auto& c : counts) sum += (c = count_dist(rng));
  std::uniform_int_distribution<int> pick(0, n - 1);
  while (sum != target_total) {
    auto& c = counts[static_cast<std::size_t>(pick(rng))];
    if (sum < target_total && c < config.max_gestures) {
      ++c;
      ++sum;
    } else if (sum > target_total && c > config.min_gestures) {
      --c;
      --sum;
    }
  }

  std::vector<Label> labels(static_cast<std::size_t>(sum));
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = label_from_index(static_cast<int>(i % kNumGestureClasses));
  std::shuffle(labels.begin(), labels.end(), rng);

  const int width = std::max<int>(4, static_cast<int>(std::to_string(n - 1).size()));
  GeneratedDataset out;
  std::size_t next = 0;
  for (int i = 0; i < n; ++i) {
    std::string id = std::to_string(i);
    id = "seq_" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(id.size()))), '0') + id;
    const auto count = static_cast<std::size_t>(counts[static_cast<std::size_t>(i)]);
    const std::span<const Label> mine(labels.data() + next, count);
    next += count;
    const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(i) + 1);
    auto g = generate_sequence(id, mine, config, seed);
    out.data.annotations[id] = g.gestures;
    out.data.sequences.push_back(std::move(g.sequence));
    out.seeds.push_back(seed);
  }
  return out;
}

std::string write_manifest(const GeneratedDataset& dataset) {
  std::string out;
  for (std::size_t i = 0; i < dataset.data.sequences.size(); ++i) {
    const auto& id = dataset.data.sequences[i].id;
    const auto it = dataset.data.annotations.find(id);
    out += id + ';' + std::to_string(dataset.seeds[i]) + ';' +
           std::to_string(it == dataset.data.annotations.end() ? 0 : it->second.size()) + '\n';
  }
  return out;
}

std::vector<Label> generate_label_stream(std::span<const std::pair<Label, int>> pattern) {
  std::vector<Label> out;
  for (const auto& [label, run] : pattern) {
    if (run < 0) throw Error(ErrorKind::kInvalidArgument, "run lengths must be non-negative");
    out.insert(out.end(), static_cast<std::size_t>(run), label);
  }
  return out;
}

}  // namespace gesturespot

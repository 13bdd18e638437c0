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

#include "gesturespot/features.hpp"

#include <cmath>
#include <numbers>

namespace gesturespot {

double window_energy(std::span<const Pose> frames) {
  double e = 0.0;
  for (std::size_t t = 1; t < frames.size(); ++t)
    for (int j = 0; j < kNumJoints; ++j) {
      const double norm_prev = frames[t - 1][j].norm();
      if (norm_prev < kEnergyNormFloor) continue;
      e += (frames[t][j] - frames[t - 1][j]).norm() / norm_prev;
    }
  return e;
}

AngleFeatures segment_angles(const Pose& pose, const Topology& topology, const Vec3& axis, bool pad_to_351) {
  std::array<Vec3, kNumAngleVectors> vecs;
  std::array<bool, kNumAngleVectors> valid{};
  const auto children = topology.segment_children();
  for (std::size_t s = 0; s < children.size(); ++s) {
    const int c = children[s];
    vecs[s] = pose[c] - pose[topology.parent[c]];
    valid[s] = vecs[s].squaredNorm() > 0.0;
  }
  vecs[kNumAngleVectors - 1] = axis;
  valid[kNumAngleVectors - 1] = axis.squaredNorm() > 0.0;

  AngleFeatures out;
  out.angles.reserve(pad_to_351 ? kNumAngles + kNumAngleVectors : kNumAngles);
  for (int a = 0; a < kNumAngleVectors; ++a)
    for (int b = a + 1; b < kNumAngleVectors; ++b) {
      if (!valid[a] || !valid[b]) {
        out.degenerate = true;
        out.angles.push_back(0.0);
        continue;
      }
      // atan2 form of arccos(<a,b>/(|a||b|)); stays accurate near 0 and pi.
      out.angles.push_back(std::atan2(vecs[a].cross(vecs[b]).norm(), vecs[a].dot(vecs[b])));
    }
  if (pad_to_351) out.angles.resize(kNumAngles + kNumAngleVectors, 0.0);
  return out;
}

std::vector<KinematicFeatures> speed_accel(std::span<const Pose> poses) {
  std::vector<KinematicFeatures> out(poses.size());
  for (std::size_t t = 0; t < poses.size(); ++t)
    for (int j = 0; j < kNumJoints; ++j) {
      out[t].speed[j] = t >= 1 ? Vec3(poses[t][j] - poses[t - 1][j]) : Vec3::Zero();
      out[t].acceleration[j] =
          t >= 2 ? Vec3(poses[t][j] - 2.0 * poses[t - 1][j] + poses[t - 2][j]) : Vec3::Zero();
    }
  return out;
}

std::vector<KinematicFeatures> speed_accel(const GestureSequence& seq) {
  std::vector<Pose> poses;
  poses.reserve(seq.frames.size());
  for (const auto& f : seq.frames) poses.push_back(f.joints);
  return speed_accel(poses);
}

JointDistanceMatrix joint_distances(const Pose& pose) {
  JointDistanceMatrix m;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < kNumJoints; ++i)
      for (int k = 0; k < kNumJoints; ++k) m.at(c, i, k) = std::abs(pose[i][c] - pose[k][c]);
  return m;
}

SphericalCoord to_spherical(const Vec3& p) {
  SphericalCoord s;
  s.r = p.norm();
  s.theta = std::atan2(std::hypot(p.x(), p.y()), p.z());
  s.phi = std::atan2(p.x(), p.y());
  if (s.phi <= -std::numbers::pi) s.phi = std::numbers::pi;
  return s;
}

Vec3 from_spherical(const SphericalCoord& s) {
  const double rho = s.r * std::sin(s.theta);
  return {rho * std::sin(s.phi), rho * std::cos(s.phi), s.r * std::cos(s.theta)};
}

std::array<SphericalCoord, kNumJoints> spherical_coords(const Pose& pose) {
  std::array<SphericalCoord, kNumJoints> out;
  for (int j = 0; j < kNumJoints; ++j) out[j] = to_spherical(pose[j]);
  return out;
}

NormalizationStats NormalizationStats::compute(std::span<const GestureSequence> training) {
  Vec3 sum = Vec3::Zero();
  double count = 0.0;
  for (const auto& seq : training)
    for (const auto& f : seq.frames)
      for (const auto& j : f.joints) {
        sum += j;
        count += 1.0;
      }
  NormalizationStats st;
  if (count == 0.0) return st;
  st.mean = sum / count;
  Vec3 sq = Vec3::Zero();
  for (const auto& seq : training)
    for (const auto& f : seq.frames)
      for (const auto& j : f.joints) sq += (j - st.mean).cwiseAbs2();
  for (int c = 0; c < 3; ++c) {
    const double sd = std::sqrt(sq[c] / count);
    st.stddev[c] = sd > 1e-12 ? sd : 1.0;
  }
  return st;
}

Pose NormalizationStats::apply(const Pose& pose) const {
  Pose out;
  for (int j = 0; j < kNumJoints; ++j) out[j] = (pose[j] - mean).cwiseQuotient(stddev);
  return out;
}

std::vector<double> kinematic_feature_vector(const GestureSequence& seq, int t, const NormalizationStats& stats,
                                          const KinematicOptions& options) {
  if (t < 0 || t >= seq.size()) throw Error(ErrorKind::kInvalidArgument, "frame index out of range");
  const Pose& p = seq.pose(t);
  const Pose norm = stats.apply(p);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(options.dimension()));
  for (int j = 0; j < kNumJoints; ++j) {
    const Vec3 s = t >= 1 ? Vec3(p[j] - seq.pose(t - 1)[j]) : Vec3::Zero();
    const Vec3 a = t >= 2 ? Vec3(p[j] - 2.0 * seq.pose(t - 1)[j] + seq.pose(t - 2)[j]) : Vec3::Zero();
    for (int c = 0; c < 3; ++c) out.push_back(norm[j][c]);
    for (int c = 0; c < 3; ++c) out.push_back(s[c]);
    for (int c = 0; c < 3; ++c) out.push_back(a[c]);
    if (options.distances)
      for (int k = 0; k < kNumJoints; ++k) out.push_back((p[j] - p[k]).norm());
    if (options.spherical) {
      const auto sc = to_spherical(p[j]);
      out.push_back(sc.r);
      out.push_back(sc.theta);
      out.push_back(sc.phi);
    }
  }
  return out;
}

std::vector<std::pair<int, int>> BaselineOptions::default_jpd_pairs() {
  const int tips[] = {joint::kThumbTip, joint::kIndexTip, joint::kMiddleTip, joint::kRingTip, joint::kLittleTip};
  std::vector<std::pair<int, int>> pairs;
  for (int tip : tips) pairs.emplace_back(joint::kWrist, tip);
  for (int i = 0; i + 1 < 5; ++i) pairs.emplace_back(tips[i], tips[i + 1]);
  return pairs;
}

int BaselineFeatureSet::per_step_dimension() const {
  return static_cast<int>(jcd.cols() + jpd.cols() + mslow.cols() + mfast.cols() + palm.cols() + 1);
}

FeatureMatrix BaselineFeatureSet::stacked() const {
  FeatureMatrix out(steps, per_step_dimension());
  out << jcd, jpd, mslow, mfast, palm, energy;
  return out;
}

BaselineFeatureSet baseline_features(std::span<const Pose> resampled, const BaselineOptions& options) {
  const int steps = static_cast<int>(resampled.size());
  const int npairs = static_cast<int>(options.jpd_pairs.size());
  BaselineFeatureSet f;
  f.steps = steps;
  f.jcd.setZero(steps, kNumJointPairs);
  f.jpd.setZero(steps, 3 * npairs);
  f.mslow.setZero(steps, 3 * kNumJoints);
  f.mfast.setZero(steps, 3 * kNumJoints);
  f.palm.setZero(steps, 3);
  f.energy.setZero(steps);

  Vec3 last_normal = Vec3::Zero();
  for (int t = 0; t < steps; ++t) {
    const Pose& p = resampled[t];
    int col = 0;
    for (int i = 0; i < kNumJoints; ++i)
      for (int k = i + 1; k < kNumJoints; ++k) f.jcd(t, col++) = (p[i] - p[k]).norm();
    for (int q = 0; q < npairs; ++q) {
      const Vec3 d = p[options.jpd_pairs[q].second] - p[options.jpd_pairs[q].first];
      const double n = d.norm();
      if (n > 0.0)
        for (int c = 0; c < 3; ++c) f.jpd(t, 3 * q + c) = d[c] / n;
    }
    for (int j = 0; j < kNumJoints; ++j)
      for (int c = 0; c < 3; ++c) {
        if (t >= 1) f.mfast(t, 3 * j + c) = p[j][c] - resampled[t - 1][j][c];
        if (t >= 2) f.mslow(t, 3 * j + c) = p[j][c] - resampled[t - 2][j][c];
      }
    const auto [a, b, c] = options.palm_joints;
    const Vec3 normal = (p[b] - p[a]).cross(p[c] - p[a]);
    const double nn = normal.norm();
    if (nn > 1e-12) last_normal = normal / nn;
    f.palm.row(t) = last_normal.transpose();
    if (t >= 1) f.energy[t] = window_energy(resampled.subspan(static_cast<std::size_t>(t - 1), 2));
  }
  return f;
}

BaselineFeatureSet baseline_features(const GestureSequence& seq, FrameRange window, const BaselineOptions& options) {
  const auto poses = resample_uniform(seq, window, options.steps);
  return baseline_features(poses, options);
}

std::string_view feature_set_name(FeatureSet f) {
  switch (f) {
    case FeatureSet::kAngles: return "angles";
    case FeatureSet::kAngles351: return "angles351";
    case FeatureSet::kKinematic: return "kinematic";
    case FeatureSet::kKinematicDistances: return "kinematic+jd";
    case FeatureSet::kKinematicFull: return "kinematic+jd+sc";
  }
  return "?";
}

FeatureSet parse_feature_set(std::string_view name) {
  for (auto f : {FeatureSet::kAngles, FeatureSet::kAngles351, FeatureSet::kKinematic, FeatureSet::kKinematicDistances,
                 FeatureSet::kKinematicFull})
    if (feature_set_name(f) == name) return f;
  throw Error(ErrorKind::kInvalidArgument, "unknown feature set '" + std::string(name) + "'");
}

namespace {
KinematicOptions kinematic_options(FeatureSet f) {
  KinematicOptions o;
  o.distances = f == FeatureSet::kKinematicDistances || f == FeatureSet::kKinematicFull;
  o.spherical = f == FeatureSet::kKinematicFull;
  return o;
}
}  // namespace

int feature_set_dimension(FeatureSet f) {
  if (f == FeatureSet::kAngles) return kNumAngles;
  if (f == FeatureSet::kAngles351) return kNumAngles + kNumJoints;
  return kinematic_options(f).dimension();
}

FeatureMatrix frame_features(const GestureSequence& seq, const FrameFeatureSpec& spec) {
  const int dim = feature_set_dimension(spec.set);
  FeatureMatrix out(seq.size(), dim);
  for (int t = 0; t < seq.size(); ++t) {
    if (is_angle_set(spec.set)) {
      const auto a = segment_angles(seq.pose(t), spec.topology, spec.axis, spec.set == FeatureSet::kAngles351);
      out.row(t) = Eigen::Map<const Eigen::RowVectorXd>(a.angles.data(), dim);
    } else {
      const auto v = kinematic_feature_vector(seq, t, spec.stats, kinematic_options(spec.set));
      out.row(t) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), dim);
    }
  }
  return out;
}

}  // namespace gesturespot

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

#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gesturespot/skeleton.hpp"

namespace gesturespot {

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kNumAngleVectors = kNumJoints;                           // 25 segments + axis
inline constexpr int kNumAngles = kNumAngleVectors * (kNumAngleVectors - 1) / 2;  // 325
inline constexpr int kNumJointPairs = kNumJoints * (kNumJoints - 1) / 2;          // 325
inline constexpr double kEnergyNormFloor = 1e-6;

// Relative joint displacement accumulated over consecutive frames:
// sum_j sum_t |w(j,t) - w(j,t-1)| / |w(j,t-1)|. Terms whose previous position
// has norm below kEnergyNormFloor are skipped.
double window_energy(std::span<const Pose> frames);

struct AngleFeatures {
  std::vector<double> angles;
  bool degenerate = false;  // some segment had zero length
};

// Angles between every unordered pair of the 25 bone vectors plus the fixed
// axis (last vector). Pairs are listed (a,b), a < b, row-major. With
// pad_to_351 the vector is extended by 26 zero self-pairs.
AngleFeatures segment_angles(const Pose& pose, const Topology& topology, const Vec3& axis,
                             bool pad_to_351 = false);

struct KinematicFeatures {
  Pose speed{};
  Pose acceleration{};
};

// First differences (speed) and second differences (acceleration) per joint.
// Missing history is zero-padded so output[t] aligns with frame t.
std::vector<KinematicFeatures> speed_accel(const GestureSequence& seq);
std::vector<KinematicFeatures> speed_accel(std::span<const Pose> poses);

struct JointDistanceMatrix {
  std::array<double, 3 * kNumJoints * kNumJoints> d{};
  double at(int axis, int i, int k) const { return d[(axis * kNumJoints + i) * kNumJoints + k]; }
  double& at(int axis, int i, int k) { return d[(axis * kNumJoints + i) * kNumJoints + k]; }
};

JointDistanceMatrix joint_distances(const Pose& pose);

struct SphericalCoord {
  double r = 0.0;
  double theta = 0.0;  // polar, [0, pi]
  double phi = 0.0;    // azimuth atan2(x, y), (-pi, pi]
};

SphericalCoord to_spherical(const Vec3& p);
Vec3 from_spherical(const SphericalCoord& s);
std::array<SphericalCoord, kNumJoints> spherical_coords(const Pose& pose);

struct NormalizationStats {
  Vec3 mean = Vec3::Zero();
  Vec3 stddev = Vec3::Ones();

  static NormalizationStats compute(std::span<const GestureSequence> training);
  Pose apply(const Pose& pose) const;
};

struct KinematicOptions {
  bool distances = true;
  bool spherical = true;
  int dimension() const { return kNumJoints * (9 + (distances ? kNumJoints : 0) + (spherical ? 3 : 0)); }
};

// Per joint, in joint order: normalized position (3), speed (3),
// acceleration (3), Euclidean distance to every joint (26), spherical
// coordinates (3). Kinematics and geometry use raw coordinates.
std::vector<double> kinematic_feature_vector(const GestureSequence& seq, int t, const NormalizationStats& stats,
                                          const KinematicOptions& options = {});

struct BaselineOptions {
  int steps = 30;
  std::vector<std::pair<int, int>> jpd_pairs = default_jpd_pairs();
  std::array<int, 3> palm_joints = {joint::kWrist, joint::kIndexMetacarpal, joint::kLittleMetacarpal};

  static std::vector<std::pair<int, int>> default_jpd_pairs();
};

struct BaselineFeatureSet {
  int steps = 0;
  FeatureMatrix jcd;     // steps x 325, upper-triangular Euclidean distances
  FeatureMatrix jpd;     // steps x 3*pairs, unit vectors
  FeatureMatrix mslow;   // steps x 78, stride-2 differences
  FeatureMatrix mfast;   // steps x 78, stride-1 differences
  FeatureMatrix palm;    // steps x 3, unit palm normal
  Eigen::VectorXd energy;  // steps, window_energy with l = 1

  int per_step_dimension() const;
  // Row t concatenates all six streams at resampled step t.
  FeatureMatrix stacked() const;
};

// Resamples the window to options.steps poses first.
BaselineFeatureSet baseline_features(const GestureSequence& seq, FrameRange window,
                                     const BaselineOptions& options = {});
BaselineFeatureSet baseline_features(std::span<const Pose> resampled, const BaselineOptions& options = {});

// Named per-frame feature layouts a classifier can consume.
enum class FeatureSet { kAngles, kAngles351, kKinematic, kKinematicDistances, kKinematicFull };

inline bool is_angle_set(FeatureSet f) { return f == FeatureSet::kAngles || f == FeatureSet::kAngles351; }

std::string_view feature_set_name(FeatureSet f);
FeatureSet parse_feature_set(std::string_view name);
int feature_set_dimension(FeatureSet f);

struct FrameFeatureSpec {
  FeatureSet set = FeatureSet::kAngles;
  Topology topology = Topology::hololens();
  Vec3 axis = Vec3::UnitY();
  NormalizationStats stats;
};

// One row per frame.
FeatureMatrix frame_features(const GestureSequence& seq, const FrameFeatureSpec& spec);

}  // namespace gesturespot

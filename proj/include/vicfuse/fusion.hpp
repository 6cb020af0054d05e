#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "vicfuse/frames.hpp"
#include "vicfuse/pairing.hpp"
#include "vicfuse/wire.hpp"

namespace vicfuse {

enum class ScoreRule {
  kKeepVehicle,      // a matched pair always keeps the vehicle box
  kKeepHigherScore,  // keep whichever side scored higher; ties go to the vehicle
};

enum class VelocityFallback {
  kZero,       // unmatched objects are treated as stationary
  kSceneMean,  // mean velocity of matched objects of the same class
};

struct FusionConfig {
  double match_dist = 1.0;  // m, BEV gate for vehicle/infrastructure duplicates
  ScoreRule score_rule = ScoreRule::kKeepVehicle;
  VelocityFallback velocity_fallback = VelocityFallback::kZero;
  bool class_constrained = true;
  // Upper bound on object speed (m/s). Frame-to-frame association uses the
  // gate match_dist + max_speed * dt.
  double max_speed = 40.0;
  double planarity_tol = kDefaultPlanarityTolRad;
};

void validate(const FusionConfig& cfg);

enum class VelocitySource { kMatched, kFallback };

// One entry per detection of the newer frame, in the newer frame's axes.
struct VelocityEstimate {
  std::vector<Eigen::Vector2d> velocity;  // m/s, BEV
  std::vector<VelocitySource> source;
};

struct FusionOutput {
  Detections detections;                  // vehicle sensor frame
  std::vector<WirePayload> transmitted;   // infrastructure -> vehicle messages

  std::size_t transmitted_bytes() const;
};

struct EarlyFusionOutput {
  PointCloud cloud;  // vehicle points first, then the transformed infrastructure block
  WirePayload transmitted;
};

// Maps infrastructure-sensor coordinates into vehicle-sensor coordinates.
Pose infrastructure_to_vehicle(const FramePair& pair);

Detections veh_only(const FramePair& pair);
Detections inf_only(const FramePair& pair, double planarity_tol = kDefaultPlanarityTolRad);

FusionOutput late_fuse(const FramePair& pair, const FusionConfig& cfg = {});

// Late fusion with caller-supplied infrastructure detections (infrastructure
// frame). late_fuse and tclf both route through here.
Detections merge_detections(const FramePair& pair, const Detections& inf_dets,
                            const FusionConfig& cfg);

EarlyFusionOutput early_fuse(const FramePair& pair);

VelocityEstimate estimate_velocities(const Frame& newer, const Frame& older,
                                     const FusionConfig& cfg = {});

// Infrastructure detections advanced to the vehicle timestamp, still in the
// infrastructure frame. Position only; yaw, size and score are carried over.
Detections compensate(const FramePair& pair, const FusionConfig& cfg = {});

FusionOutput tclf(const FramePair& pair, const FusionConfig& cfg = {});

}  // namespace vicfuse

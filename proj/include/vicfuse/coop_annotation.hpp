#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "vicfuse/frames.hpp"
#include "vicfuse/pairing.hpp"

namespace vicfuse {

inline constexpr double kDefaultDupDist = 1.0;

// A duplicate decision close enough to the gate that a human should look.
struct AuditEntry {
  std::size_t inf_index = 0;  // into the infrastructure annotations
  std::size_t veh_index = 0;  // nearest same-class vehicle annotation
  double distance = 0.0;
  bool suppressed = false;
};

struct FusedGroundTruth {
  Detections boxes;  // vehicle annotations first, then appended infrastructure boxes
  std::vector<AuditEntry> audit;
};

// GT = GT_v U GT_i for a synchronous pair, expressed in the vehicle sensor
// frame. An infrastructure box is a duplicate when it is assigned to a
// vehicle box of the same class within dup_dist (BEV center distance); the
// vehicle box is then kept untouched. Throws NotSynchronous,
// MissingAnnotations and NonPlanarRotation.
FusedGroundTruth fuse_ground_truth(const FramePair& pair, double dup_dist = kDefaultDupDist,
                                   double sync_threshold = kSyncThreshold);

// The vehicle frame with its annotations replaced by the fused set.
Frame with_fused_ground_truth(const FramePair& pair, double dup_dist = kDefaultDupDist);

std::string format_audit(const FusedGroundTruth& fused, double dup_dist);
void write_audit_report(const std::vector<FusedGroundTruth>& fused, double dup_dist,
                        const std::filesystem::path& path);

}  // namespace vicfuse

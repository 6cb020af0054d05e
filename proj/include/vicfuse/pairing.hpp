#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "vicfuse/frames.hpp"

namespace vicfuse {

using FrameRef = std::shared_ptr<const Frame>;

// A vehicle frame joined with the infrastructure frame it is fused with.
// delta_t = t_vehicle - t_infrastructure.
struct FramePair {
  FrameRef vehicle;
  FrameRef infrastructure;
  std::vector<FrameRef> inf_history;  // earlier infrastructure frames, most recent first
  double delta_t = 0.0;
};

enum class SyncClass { kSynchronous, kAsynchronous };

inline constexpr double kSyncThreshold = 0.010;

SyncClass classify_sync(const FramePair& pair, double threshold = kSyncThreshold);

enum class PairingPolicy {
  kNearestEarlier,   // causal: never pair with a later infrastructure frame
  kAbsoluteNearest,  // annotation-time pairing; delta_t may be negative
};

struct PairingOptions {
  double max_dt = kSyncThreshold;
  std::size_t history_depth = 2;
  PairingPolicy policy = PairingPolicy::kNearestEarlier;
};

struct PairingResult {
  std::vector<FramePair> pairs;
  std::size_t skipped = 0;  // vehicle frames with no infrastructure frame within max_dt
};

std::vector<FrameRef> share_frames(std::vector<Frame> frames);

// Both streams must be timestamp-sorted; InvalidArgument otherwise.
PairingResult pair_streams(std::span<const FrameRef> vehicle,
                           std::span<const FrameRef> infrastructure,
                           const PairingOptions& opts = {});

struct AsyncResult {
  std::vector<FramePair> pairs;
  std::size_t dropped = 0;  // pairs whose history was shallower than k
};

// Replaces each infrastructure frame by its k-th predecessor.
AsyncResult make_async_k(std::span<const FramePair> pairs, std::size_t k);

struct SplitRatios {
  double train = 5.0;
  double valid = 2.0;
  double test = 3.0;
};

enum class SplitUnit { kPair, kScene };

struct Split {
  std::vector<FramePair> train;
  std::vector<FramePair> valid;
  std::vector<FramePair> test;
};

// Seeded shuffle, then floor(n * r / sum) units each for train and valid and
// the remainder for test. kScene keeps all pairs of one vehicle scene_id
// together (frames without a scene_id form singleton groups).
Split split(std::span<const FramePair> pairs, const SplitRatios& ratios, std::uint64_t seed,
            SplitUnit unit = SplitUnit::kPair);

}  // namespace vicfuse

#include "vicfuse/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "vicfuse/errors.hpp"

namespace vicfuse {

SyncClass classify_sync(const FramePair& pair, double threshold) {
  return std::abs(pair.delta_t) <= threshold ? SyncClass::kSynchronous : SyncClass::kAsynchronous;
}

std::vector<FrameRef> share_frames(std::vector<Frame> frames) {
  std::vector<FrameRef> out;
  out.reserve(frames.size());
  for (auto& f : frames) out.push_back(std::make_shared<const Frame>(std::move(f)));
  return out;
}

namespace {

void require_sorted(std::span<const FrameRef> s, const char* name) {
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!(s[i]->timestamp > s[i - 1]->timestamp)) {
      throw InvalidArgument(std::string(name) + " stream is not strictly timestamp-sorted");
    }
  }
}

}  // namespace

PairingResult pair_streams(std::span<const FrameRef> vehicle,
                           std::span<const FrameRef> infrastructure, const PairingOptions& opts) {
  require_sorted(vehicle, "vehicle");
  require_sorted(infrastructure, "infrastructure");
  PairingResult result;
  for (const auto& veh : vehicle) {
    const double tv = veh->timestamp;
    // First infrastructure frame strictly later than tv.
    const auto later = std::upper_bound(
        infrastructure.begin(), infrastructure.end(), tv,
        [](double t, const FrameRef& f) { return t < f->timestamp; });
    std::ptrdiff_t idx = (later - infrastructure.begin()) - 1;  // nearest earlier-or-equal
    if (opts.policy == PairingPolicy::kAbsoluteNearest && later != infrastructure.end()) {
      const double after = (*later)->timestamp - tv;
      if (idx < 0 || after < tv - infrastructure[static_cast<std::size_t>(idx)]->timestamp) {
        idx = later - infrastructure.begin();
      }
    }
    if (idx < 0) {
      ++result.skipped;
      continue;
    }
    const auto& inf = infrastructure[static_cast<std::size_t>(idx)];
    const double dt = tv - inf->timestamp;
    if (std::abs(dt) > opts.max_dt) {
      ++result.skipped;
      continue;
    }
    FramePair pair{veh, inf, {}, dt};
    for (std::ptrdiff_t h = idx - 1;
         h >= 0 && pair.inf_history.size() < opts.history_depth; --h) {
      pair.inf_history.push_back(infrastructure[static_cast<std::size_t>(h)]);
    }
    result.pairs.push_back(std::move(pair));
  }
  return result;
}

AsyncResult make_async_k(std::span<const FramePair> pairs, std::size_t k) {
  AsyncResult out;
  for (const auto& p : pairs) {
    if (k == 0) {
      out.pairs.push_back(p);
      continue;
    }
    if (p.inf_history.size() < k) {
      ++out.dropped;
      continue;
    }
    FramePair shifted;
    shifted.vehicle = p.vehicle;
    shifted.infrastructure = p.inf_history[k - 1];
    shifted.inf_history.assign(p.inf_history.begin() + static_cast<std::ptrdiff_t>(k),
                               p.inf_history.end());
    shifted.delta_t = p.vehicle->timestamp - shifted.infrastructure->timestamp;
    out.pairs.push_back(std::move(shifted));
  }
  return out;
}

Split split(std::span<const FramePair> pairs, const SplitRatios& ratios, std::uint64_t seed,
            SplitUnit unit) {
  if (!(ratios.train > 0.0 && ratios.valid > 0.0 && ratios.test > 0.0)) {
    throw InvalidArgument("split ratios must be positive");
  }
  // Group indices; pair-level splitting uses singleton groups.
  std::vector<std::vector<std::size_t>> groups;
  if (unit == SplitUnit::kScene) {
    std::map<std::string, std::size_t> by_scene;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& scene = pairs[i].vehicle->scene_id;
      if (!scene) {
        groups.push_back({i});
        continue;
      }
      auto [it, inserted] = by_scene.try_emplace(*scene, groups.size());
      if (inserted) groups.emplace_back();
      groups[it->second].push_back(i);
    }
  } else {
    groups.resize(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) groups[i] = {i};
  }

  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const double sum = ratios.train + ratios.valid + ratios.test;
  const auto n = static_cast<double>(groups.size());
  const auto n_train = static_cast<std::size_t>(std::floor(n * ratios.train / sum));
  const auto n_valid = static_cast<std::size_t>(std::floor(n * ratios.valid / sum));

  Split out;
  for (std::size_t r = 0; r < order.size(); ++r) {
    auto& dest = r < n_train ? out.train : (r < n_train + n_valid ? out.valid : out.test);
    for (std::size_t i : groups[order[r]]) dest.push_back(pairs[i]);
  }
  return out;
}

}  // namespace vicfuse

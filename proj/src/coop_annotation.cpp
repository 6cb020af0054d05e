#include "vicfuse/coop_annotation.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "vicfuse/errors.hpp"
#include "vicfuse/matching.hpp"

namespace vicfuse {
namespace {

constexpr double kAuditBand = 0.2;

}  // namespace

FusedGroundTruth fuse_ground_truth(const FramePair& pair, double dup_dist,
                                   double sync_threshold) {
  if (!(dup_dist > 0.0)) throw InvalidArgument("dup_dist must be positive");
  if (classify_sync(pair, sync_threshold) != SyncClass::kSynchronous) {
    throw NotSynchronous(fmt::format("pair delta_t {:.4f} s exceeds {:.4f} s", pair.delta_t,
                                     sync_threshold));
  }
  if (!pair.vehicle->annotations || !pair.infrastructure->annotations) {
    throw MissingAnnotations("both frames of the pair need annotations");
  }
  const Detections& veh = *pair.vehicle->annotations;
  const Pose inf_to_veh = compose(inverse(pair.vehicle->pose), pair.infrastructure->pose);

  Detections inf;
  inf.reserve(pair.infrastructure->annotations->size());
  for (const auto& d : *pair.infrastructure->annotations) {
    inf.push_back({transform_box(inf_to_veh, d.box), d.class_id, d.score});
  }

  // Duplicates can only occur within a class.
  std::map<std::uint8_t, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> by_class;
  for (std::size_t i = 0; i < inf.size(); ++i) by_class[inf[i].class_id].first.push_back(i);
  for (std::size_t j = 0; j < veh.size(); ++j) {
    auto it = by_class.find(veh[j].class_id);
    if (it != by_class.end()) it->second.second.push_back(j);
  }

  std::vector<char> suppressed(inf.size(), 0);
  for (const auto& [cls, idx] : by_class) {
    const auto& [inf_idx, veh_idx] = idx;
    if (veh_idx.empty()) continue;
    std::vector<BBox3D> a, b;
    for (auto i : inf_idx) a.push_back(inf[i].box);
    for (auto j : veh_idx) b.push_back(veh[j].box);
    const Assignment asg = match_with_threshold(a, b, dup_dist);
    for (const auto& [r, c] : asg.pairs) suppressed[inf_idx[r]] = 1;
  }

  FusedGroundTruth out;
  out.boxes = veh;
  for (std::size_t i = 0; i < inf.size(); ++i) {
    if (!suppressed[i]) out.boxes.push_back(inf[i]);

    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < veh.size(); ++j) {
      if (veh[j].class_id != inf[i].class_id) continue;
      const double d = bev_distance(inf[i].box, veh[j].box);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    if (std::isfinite(best) && std::abs(best - dup_dist) <= kAuditBand * dup_dist) {
      out.audit.push_back({i, best_j, best, suppressed[i] != 0});
    }
  }
  return out;
}

Frame with_fused_ground_truth(const FramePair& pair, double dup_dist) {
  Frame f = *pair.vehicle;
  f.annotations = fuse_ground_truth(pair, dup_dist).boxes;
  return f;
}

std::string format_audit(const FusedGroundTruth& fused, double dup_dist) {
  std::string out;
  for (const auto& e : fused.audit) {
    out += fmt::format("inf#{} veh#{} dist={:.3f}m gate={:.3f}m {}\n", e.inf_index, e.veh_index,
                       e.distance, dup_dist, e.suppressed ? "suppressed" : "kept");
  }
  return out;
}

void write_audit_report(const std::vector<FusedGroundTruth>& fused, double dup_dist,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write audit report " + path.string());
  out << fmt::format("# near-threshold duplicate decisions (gate {:.3f} m, band +/-{:.0f}%)\n",
                     dup_dist, kAuditBand * 100.0);
  for (std::size_t p = 0; p < fused.size(); ++p) {
    if (fused[p].audit.empty()) continue;
    out << "pair " << p << "\n" << format_audit(fused[p], dup_dist);
  }
}

}  // namespace vicfuse

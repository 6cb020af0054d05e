#include "vicfuse/fusion.hpp"

#include <map>

#include "vicfuse/errors.hpp"
#include "vicfuse/matching.hpp"

namespace vicfuse {
namespace {

const Detections& require_detections(const Frame& f) {
  if (!f.detections) throw MissingDetections("frame '" + f.sensor_id + "' carries no detections");
  return *f.detections;
}

struct Group {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
};

// Gated assignment between two detection lists, optionally within classes.
// Returns (row, col) index pairs into the original lists.
std::vector<std::pair<std::size_t, std::size_t>> gated_pairs(const Detections& rows,
                                                             const Detections& cols,
                                                             double gate, bool by_class) {
  std::map<int, Group> groups;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    groups[by_class ? rows[i].class_id : 0].rows.push_back(i);
  }
  for (std::size_t j = 0; j < cols.size(); ++j) {
    groups[by_class ? cols[j].class_id : 0].cols.push_back(j);
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& [key, g] : groups) {
    if (g.rows.empty() || g.cols.empty()) continue;
    std::vector<BBox3D> a, b;
    for (auto i : g.rows) a.push_back(rows[i].box);
    for (auto j : g.cols) b.push_back(cols[j].box);
    for (const auto& [r, c] : match_with_threshold(a, b, gate).pairs) {
      out.emplace_back(g.rows[r], g.cols[c]);
    }
  }
  return out;
}

}  // namespace

void validate(const FusionConfig& cfg) {
  if (!(cfg.match_dist > 0.0)) throw InvalidArgument("match_dist must be positive");
  if (!(cfg.max_speed >= 0.0)) throw InvalidArgument("max_speed must be non-negative");
}

std::size_t FusionOutput::transmitted_bytes() const {
  std::size_t n = 0;
  for (const auto& p : transmitted) n += p.size();
  return n;
}

Pose infrastructure_to_vehicle(const FramePair& pair) {
  return compose(inverse(pair.vehicle->pose), pair.infrastructure->pose);
}

Detections veh_only(const FramePair& pair) { return require_detections(*pair.vehicle); }

Detections inf_only(const FramePair& pair, double planarity_tol) {
  const Detections& inf = require_detections(*pair.infrastructure);
  const Pose to_veh = infrastructure_to_vehicle(pair);
  Detections out;
  out.reserve(inf.size());
  for (const auto& d : inf) out.push_back({transform_box(to_veh, d.box, planarity_tol), d.class_id, d.score});
  return out;
}

Detections merge_detections(const FramePair& pair, const Detections& inf_dets,
                            const FusionConfig& cfg) {
  validate(cfg);
  const Detections& veh = require_detections(*pair.vehicle);
  const Pose to_veh = infrastructure_to_vehicle(pair);
  Detections inf;
  inf.reserve(inf_dets.size());
  for (const auto& d : inf_dets) {
    inf.push_back({transform_box(to_veh, d.box, cfg.planarity_tol), d.class_id, d.score});
  }

  Detections out = veh;
  std::vector<char> inf_matched(inf.size(), 0);
  for (const auto& [v, i] : gated_pairs(veh, inf, cfg.match_dist, cfg.class_constrained)) {
    inf_matched[i] = 1;
    if (cfg.score_rule == ScoreRule::kKeepHigherScore && inf[i].score > veh[v].score) {
      out[v] = inf[i];
    }
  }
  for (std::size_t i = 0; i < inf.size(); ++i) {
    if (!inf_matched[i]) out.push_back(inf[i]);
  }
  return out;
}

FusionOutput late_fuse(const FramePair& pair, const FusionConfig& cfg) {
  const Detections& inf = require_detections(*pair.infrastructure);
  FusionOutput out;
  out.detections = merge_detections(pair, inf, cfg);
  out.transmitted.push_back(encode_objects(inf));
  return out;
}

EarlyFusionOutput early_fuse(const FramePair& pair) {
  if (!pair.vehicle->cloud || !pair.infrastructure->cloud) {
    throw MissingCloud("early fusion needs point clouds from both sides");
  }
  const PointCloud& veh = *pair.vehicle->cloud;
  const PointCloud& inf = *pair.infrastructure->cloud;
  const PointCloud moved = transform_points(infrastructure_to_vehicle(pair), inf);

  EarlyFusionOutput out;
  out.cloud.points.reserve(veh.size() + moved.size());
  out.cloud.points = veh.points;
  out.cloud.points.insert(out.cloud.points.end(), moved.points.begin(), moved.points.end());
  if (veh.intensity || inf.intensity) {
    std::vector<double> inten;
    inten.reserve(out.cloud.points.size());
    if (veh.intensity) {
      inten = *veh.intensity;
    } else {
      inten.assign(veh.size(), 0.0);
    }
    if (inf.intensity) {
      inten.insert(inten.end(), inf.intensity->begin(), inf.intensity->end());
    } else {
      inten.resize(inten.size() + inf.size(), 0.0);
    }
    out.cloud.intensity = std::move(inten);
  }
  out.transmitted = encode_cloud(inf);
  return out;
}

VelocityEstimate estimate_velocities(const Frame& newer, const Frame& older,
                                     const FusionConfig& cfg) {
  validate(cfg);
  const double dt = newer.timestamp - older.timestamp;
  if (!(dt > 0.0)) throw NonPositiveDt("newer frame must be strictly later than older frame");
  const Detections& now = require_detections(newer);
  Detections before = require_detections(older);
  if (!(older.pose == newer.pose)) {
    const Pose older_to_newer = compose(inverse(newer.pose), older.pose);
    for (auto& d : before) d.box = transform_box(older_to_newer, d.box, cfg.planarity_tol);
  }

  VelocityEstimate est;
  est.velocity.assign(now.size(), Eigen::Vector2d::Zero());
  est.source.assign(now.size(), VelocitySource::kFallback);

  const double gate = cfg.match_dist + cfg.max_speed * dt;
  std::map<int, std::pair<Eigen::Vector2d, std::size_t>> class_sum;
  for (const auto& [i, j] : gated_pairs(now, before, gate, true)) {
    const Eigen::Vector3d disp = now[i].box.center - before[j].box.center;
    est.velocity[i] = Eigen::Vector2d(disp.x(), disp.y()) / dt;
    est.source[i] = VelocitySource::kMatched;
    auto& [sum, count] = class_sum.try_emplace(now[i].class_id, Eigen::Vector2d::Zero(), 0).first->second;
    sum += est.velocity[i];
    ++count;
  }

  if (cfg.velocity_fallback == VelocityFallback::kSceneMean) {
    for (std::size_t i = 0; i < now.size(); ++i) {
      if (est.source[i] == VelocitySource::kMatched) continue;
      auto it = class_sum.find(now[i].class_id);
      if (it != class_sum.end() && it->second.second > 0) {
        est.velocity[i] = it->second.first / static_cast<double>(it->second.second);
      }
    }
  }
  return est;
}

Detections compensate(const FramePair& pair, const FusionConfig& cfg) {
  if (pair.inf_history.empty()) {
    throw InsufficientHistory("time compensation needs a previous infrastructure frame");
  }
  const Frame& newer = *pair.infrastructure;
  const VelocityEstimate est = estimate_velocities(newer, *pair.inf_history.front(), cfg);
  Detections out = require_detections(newer);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].box.center.x() += est.velocity[i].x() * pair.delta_t;
    out[i].box.center.y() += est.velocity[i].y() * pair.delta_t;
  }
  return out;
}

FusionOutput tclf(const FramePair& pair, const FusionConfig& cfg) {
  const Detections compensated = compensate(pair, cfg);
  FusionOutput out;
  out.detections = merge_detections(pair, compensated, cfg);
  out.transmitted.push_back(encode_objects(compensated));
  out.transmitted.push_back(encode_objects(require_detections(*pair.inf_history.front())));
  return out;
}

}  // namespace vicfuse

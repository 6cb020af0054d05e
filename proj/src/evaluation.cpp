#include "vicfuse/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "vicfuse/errors.hpp"

namespace vicfuse {

std::string RangeBin::label() const { return fmt::format("{:g}-{:g}m", min, max); }

void validate(const EvalConfig& cfg) {
  if (!(cfg.iou_threshold > 0.0 && cfg.iou_threshold <= 1.0)) {
    throw InvalidArgument("iou_threshold must be in (0, 1]");
  }
  for (const auto& b : cfg.range_bins) {
    if (!(b.max > b.min) || b.min < 0.0) throw InvalidArgument("degenerate range bin " + b.label());
  }
  if (!(cfg.area.x_max > cfg.area.x_min && cfg.area.y_max > cfg.area.y_min)) {
    throw InvalidArgument("degenerate evaluation area");
  }
}

Detections filter_area(std::span<const Detection> dets, const Area& area) {
  Detections out;
  for (const auto& d : dets) {
    if (area.contains(d.box.center.x(), d.box.center.y())) out.push_back(d);
  }
  return out;
}

namespace {

struct Scored {
  double score;
  std::size_t frame;
  std::size_t index;
  bool tp;
};

double overlap(const BBox3D& a, const BBox3D& b, MetricKind kind) {
  return kind == MetricKind::kAp3d ? iou_3d(a, b) : iou_bev(a, b);
}

bool selected(const Detection& d, const EvalConfig& cfg) {
  return !cfg.class_id || d.class_id == *cfg.class_id;
}

std::vector<double> recall_positions(Interpolation interp) {
  std::vector<double> q;
  if (interp == Interpolation::kRecall40) {
    for (int m = 1; m <= 40; ++m) q.push_back(m / 40.0);
  } else {
    for (int m = 0; m <= 10; ++m) q.push_back(m / 10.0);
  }
  return q;
}

}  // namespace

ApCounts evaluate_ap(std::span<const Detections> dets, std::span<const Detections> gt,
                     const EvalConfig& cfg) {
  validate(cfg);
  if (dets.size() != gt.size()) throw InvalidArgument("detections and ground truth frame counts differ");

  ApCounts out;
  std::vector<Scored> all;
  for (std::size_t f = 0; f < dets.size(); ++f) {
    std::vector<std::size_t> gt_idx;
    for (std::size_t g = 0; g < gt[f].size(); ++g) {
      if (selected(gt[f][g], cfg)) gt_idx.push_back(g);
    }
    out.num_gt += gt_idx.size();

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < dets[f].size(); ++i) {
      if (selected(dets[f][i], cfg)) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return dets[f][a].score > dets[f][b].score;
    });

    std::vector<char> taken(gt_idx.size(), 0);
    for (std::size_t i : order) {
      const Detection& d = dets[f][i];
      double best = -1.0;
      std::size_t best_k = 0;
      for (std::size_t k = 0; k < gt_idx.size(); ++k) {
        const Detection& g = gt[f][gt_idx[k]];
        if (taken[k] || g.class_id != d.class_id) continue;
        const double iou = overlap(d.box, g.box, cfg.metric);
        if (iou > best) {
          best = iou;
          best_k = k;
        }
      }
      const bool tp = best >= cfg.iou_threshold;
      if (tp) taken[best_k] = 1;
      all.push_back({d.score, f, i, tp});
    }
  }

  std::stable_sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.index < b.index;
  });

  std::vector<double> precision(all.size()), recall(all.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (all[k].tp) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = out.num_gt > 0 ? static_cast<double>(tp) / static_cast<double>(out.num_gt) : 0.0;
  }
  out.tp = tp;
  out.fp = all.size() - tp;
  if (out.num_gt == 0) return out;

  // Running maximum of precision from the tail gives the interpolated curve.
  std::vector<double> envelope(precision);
  for (std::size_t k = envelope.size(); k-- > 1;) {
    envelope[k - 1] = std::max(envelope[k - 1], envelope[k]);
  }
  const auto positions = recall_positions(cfg.interpolation);
  double sum = 0.0;
  for (double q : positions) {
    const auto it = std::lower_bound(recall.begin(), recall.end(), q);
    if (it != recall.end()) sum += envelope[static_cast<std::size_t>(it - recall.begin())];
  }
  out.ap = sum / static_cast<double>(positions.size());
  return out;
}

std::optional<double> average_precision(std::span<const Detections> dets,
                                        std::span<const Detections> gt, const EvalConfig& cfg) {
  return evaluate_ap(dets, gt, cfg).ap;
}

EvalReport range_binned_ap(std::span<const Detections> dets, std::span<const Detections> gt,
                           const EvalConfig& cfg) {
  validate(cfg);
  if (dets.size() != gt.size()) throw InvalidArgument("detections and ground truth frame counts differ");
  std::vector<Detections> area_dets, area_gt;
  area_dets.reserve(dets.size());
  area_gt.reserve(gt.size());
  for (std::size_t f = 0; f < dets.size(); ++f) {
    area_dets.push_back(filter_area(dets[f], cfg.area));
    area_gt.push_back(filter_area(gt[f], cfg.area));
  }

  const auto to_bin = [](std::string label, const ApCounts& c) {
    return BinResult{std::move(label), c.ap, c.num_gt, c.tp, c.fp};
  };

  EvalReport report;
  report.metric = cfg.metric;
  report.overall = to_bin("Overall", evaluate_ap(area_dets, area_gt, cfg));

  const auto in_bin = [](const Detections& src, const RangeBin& bin) {
    Detections out;
    for (const auto& d : src) {
      const double r = std::hypot(d.box.center.x(), d.box.center.y());
      if (r >= bin.min && r < bin.max) out.push_back(d);
    }
    return out;
  };
  for (const auto& bin : cfg.range_bins) {
    std::vector<Detections> bd, bg;
    for (std::size_t f = 0; f < area_dets.size(); ++f) {
      bd.push_back(in_bin(area_dets[f], bin));
      bg.push_back(in_bin(area_gt[f], bin));
    }
    report.bins.push_back(to_bin(bin.label(), evaluate_ap(bd, bg, cfg)));
  }
  return report;
}

double average_byte(std::span<const WirePayload> payloads) {
  if (payloads.empty()) return 0.0;
  double total = 0.0;
  for (const auto& p : payloads) total += static_cast<double>(p.size());
  return total / static_cast<double>(payloads.size());
}

double average_byte(std::span<const std::vector<WirePayload>> per_frame) {
  if (per_frame.empty()) return 0.0;
  double total = 0.0;
  for (const auto& frame : per_frame) {
    for (const auto& p : frame) total += static_cast<double>(p.size());
  }
  return total / static_cast<double>(per_frame.size());
}

std::string to_string(MetricKind kind) { return kind == MetricKind::kAp3d ? "AP_3D" : "AP_BEV"; }

nlohmann::json to_json(const EvalReport& report) {
  const auto bin_json = [](const BinResult& b) {
    nlohmann::json j{{"label", b.label}, {"num_gt", b.num_gt}, {"tp", b.tp}, {"fp", b.fp}};
    j["ap"] = b.ap ? nlohmann::json(*b.ap) : nlohmann::json(nullptr);
    return j;
  };
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : report.bins) bins.push_back(bin_json(b));
  return {{"metric", to_string(report.metric)}, {"overall", bin_json(report.overall)}, {"bins", bins}};
}

}  // namespace vicfuse

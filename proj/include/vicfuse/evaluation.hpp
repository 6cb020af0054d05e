#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "vicfuse/frames.hpp"
#include "vicfuse/wire.hpp"

namespace vicfuse {

enum class MetricKind { kAp3d, kApBev };
enum class Interpolation { kRecall40, kRecall11 };

// Closed rectangle in the vehicle sensor frame.
struct Area {
  double x_min = 0.0;
  double y_min = -39.12;
  double x_max = 100.0;
  double y_max = 39.12;

  bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
};

// Half-open BEV range interval [min, max) around the sensor origin.
struct RangeBin {
  double min = 0.0;
  double max = 0.0;

  std::string label() const;
};

struct EvalConfig {
  double iou_threshold = 0.5;
  MetricKind metric = MetricKind::kAp3d;
  Interpolation interpolation = Interpolation::kRecall40;
  std::vector<RangeBin> range_bins = {{0.0, 30.0}, {30.0, 50.0}, {50.0, 100.0}};
  Area area;
  std::optional<std::uint8_t> class_id;  // nullopt: every class, matched class-to-class
};

void validate(const EvalConfig& cfg);

struct BinResult {
  std::string label;
  std::optional<double> ap;  // absent when the bin holds no ground truth
  std::size_t num_gt = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
};

// AP over the whole area plus one entry per range bin.
struct EvalReport {
  MetricKind metric = MetricKind::kAp3d;
  BinResult overall;
  std::vector<BinResult> bins;
};

Detections filter_area(std::span<const Detection> dets, const Area& area);

struct ApCounts {
  std::optional<double> ap;
  std::size_t num_gt = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
};

// Per-frame greedy matching by descending score (ties keep input order), a
// global precision/recall sweep and interpolated precision at evenly spaced
// recall positions. No area or range filtering is applied here.
ApCounts evaluate_ap(std::span<const Detections> dets, std::span<const Detections> gt,
                     const EvalConfig& cfg);
std::optional<double> average_precision(std::span<const Detections> dets,
                                        std::span<const Detections> gt, const EvalConfig& cfg);

EvalReport range_binned_ap(std::span<const Detections> dets, std::span<const Detections> gt,
                           const EvalConfig& cfg);

// Mean payload length in bytes; 0 for no payloads.
double average_byte(std::span<const WirePayload> payloads);
// Mean over frames of the bytes sent for that frame.
double average_byte(std::span<const std::vector<WirePayload>> per_frame);

std::string to_string(MetricKind kind);
nlohmann::json to_json(const EvalReport& report);

}  // namespace vicfuse

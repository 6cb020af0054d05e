#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "vicfuse/evaluation.hpp"
#include "vicfuse/fusion.hpp"
#include "vicfuse/pairing.hpp"
#include "vicfuse/simulation.hpp"

namespace vicfuse {

enum class Pipeline { kVehOnly, kInfOnly, kLate, kEarly, kTclf };

std::string to_string(Pipeline p);
Pipeline pipeline_from_string(const std::string& s);

// Detector run on the fused point cloud for early fusion. Any function of
// (merged cloud, pair) fits; the shipped one is an oracle.
using CloudDetector = std::function<Detections(const PointCloud& merged, const FramePair& pair)>;

// Oracle stand-in for a learned detector: reports each vehicle-frame
// annotation box whose interior holds at least `min_points` merged points,
// with score growing with the point count. Boxes are exact, so early-fusion
// numbers are an upper bound.
CloudDetector oracle_cloud_detector(std::size_t min_points = 5);

enum class SplitSelection { kAll, kTrain, kValid, kTest };

struct BenchConfig {
  std::vector<Pipeline> pipelines = {Pipeline::kLate};
  std::vector<std::size_t> async_ks = {0};
  PairingOptions pairing{kSyncThreshold, 3, PairingPolicy::kNearestEarlier};
  FusionConfig fusion;
  EvalConfig eval;
  std::vector<MetricKind> metrics = {MetricKind::kAp3d, MetricKind::kApBev};
  SplitSelection split = SplitSelection::kAll;
  std::uint64_t split_seed = 0;
  std::size_t early_min_points = 5;
  std::size_t workers = 1;  // never affects results
};

nlohmann::json to_json(const BenchConfig& cfg);
// Overlays the fields present in `j` onto `base`.
BenchConfig bench_config_from_json(const nlohmann::json& j, BenchConfig base = {});

struct BenchRow {
  Pipeline pipeline = Pipeline::kLate;
  std::size_t k = 0;
  std::size_t num_pairs = 0;
  std::vector<EvalReport> reports;  // one per configured metric
  double average_byte = 0.0;
};

struct BenchReport {
  std::string config_hash;
  std::string inputs_hash;
  std::size_t unpaired = 0;      // vehicle frames without a synchronous partner
  std::size_t short_history = 0; // pairs dropped for lacking history depth
  std::vector<BenchRow> rows;
};

// Everything needed to redraw one evaluated pair.
struct PairArtifact {
  std::size_t pair = 0;
  double vehicle_t = 0.0;
  double delta_t = 0.0;
  Detections ground_truth;
  Detections vehicle;
  Detections infrastructure;  // transformed (and, for TCLF, compensated)
  Detections fused;
};

struct PipelineRun {
  std::vector<Detections> outputs;
  std::vector<std::vector<WirePayload>> transmitted;
  std::vector<PairArtifact> artifacts;
};

// Runs one pipeline over every pair; results are index-aligned with `pairs`.
PipelineRun run_pipeline(const std::vector<FramePair>& pairs, Pipeline pipeline, const BenchConfig& cfg,
                         const CloudDetector& detector);

// Pairs the streams with history depth cfg.pairing.history_depth, keeps pairs
// whose history is full (so every k evaluates the same vehicle frames),
// applies the split, then shifts, runs and evaluates each (pipeline, k).
BenchReport run_bench(const std::vector<Frame>& vehicle, const std::vector<Frame>& infrastructure,
                      const BenchConfig& cfg, const CloudDetector& detector = oracle_cloud_detector(),
                      std::vector<std::vector<PairArtifact>>* artifacts = nullptr);

nlohmann::json to_json(const BenchReport& report);
std::string format_table(const BenchReport& report, const BenchConfig& cfg);

nlohmann::json to_json(const PairArtifact& a);
PairArtifact pair_artifact_from_json(const nlohmann::json& j);

std::string fnv1a_hex(const std::string& bytes);

// CLI entry points. Each returns a process exit code.
struct SimulateOptions {
  std::optional<std::filesystem::path> config;
  std::string preset = "default";
  std::optional<std::uint64_t> seed;
  std::filesystem::path out;
  std::size_t workers = 1;
};
int cmd_simulate(const SimulateOptions& opts);

struct BenchOptions {
  std::filesystem::path streams;  // directory holding vehicle.jsonl and infrastructure.jsonl
  std::filesystem::path out;
  std::optional<std::filesystem::path> config;
  std::vector<std::string> pipelines;
  std::vector<std::size_t> async_ks;
  std::optional<double> iou;
  std::optional<std::string> metric;  // "3d", "bev" or "both"
  std::optional<std::uint64_t> seed;
  std::optional<std::string> split;
  std::size_t workers = 1;
};
int cmd_bench(const BenchOptions& opts);

struct PlotOptions {
  std::filesystem::path bench;  // output directory of cmd_bench
  std::string pipeline = "late";
  std::size_t k = 0;
  std::size_t pair = 0;
  std::filesystem::path out;
};
int cmd_plot(const PlotOptions& opts);

std::string artifact_file_name(Pipeline p, std::size_t k);

}  // namespace vicfuse

#include "vicfuse/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "vicfuse/errors.hpp"
#include "vicfuse/parallel.hpp"

namespace vicfuse {

using nlohmann::json;

namespace {

constexpr std::pair<Pipeline, const char*> kPipelineNames[] = {
    {Pipeline::kVehOnly, "veh_only"}, {Pipeline::kInfOnly, "inf_only"}, {Pipeline::kLate, "late"},
    {Pipeline::kEarly, "early"},      {Pipeline::kTclf, "tclf"},
};

std::string metric_key(MetricKind m) { return m == MetricKind::kAp3d ? "3d" : "bev"; }

MetricKind metric_from_key(const std::string& s) {
  if (s == "3d") return MetricKind::kAp3d;
  if (s == "bev") return MetricKind::kApBev;
  throw ConfigError("metrics", "expected '3d' or 'bev', got '" + s + "'");
}

std::vector<MetricKind> metrics_from_option(const std::string& s) {
  if (s == "both") return {MetricKind::kAp3d, MetricKind::kApBev};
  return {metric_from_key(s)};
}

std::string split_key(SplitSelection s) {
  switch (s) {
    case SplitSelection::kAll: return "all";
    case SplitSelection::kTrain: return "train";
    case SplitSelection::kValid: return "valid";
    case SplitSelection::kTest: return "test";
  }
  return "all";
}

SplitSelection split_from_key(const std::string& s) {
  for (auto sel : {SplitSelection::kAll, SplitSelection::kTrain, SplitSelection::kValid, SplitSelection::kTest}) {
    if (split_key(sel) == s) return sel;
  }
  throw ConfigError("split", "expected all, train, valid or test, got '" + s + "'");
}

// Points strictly above the box floor count; the floor band is where ground
// returns sit.
std::size_t points_in_box(const PointCloud& cloud, const BBox3D& box, double margin) {
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  const double hl = 0.5 * box.size.length + margin, hw = 0.5 * box.size.width + margin;
  const double z_lo = box.center.z() - 0.5 * box.size.height + margin;
  const double z_hi = box.center.z() + 0.5 * box.size.height + margin;
  std::size_t n = 0;
  for (const auto& p : cloud.points) {
    const double dx = p.x() - box.center.x(), dy = p.y() - box.center.y();
    const double lx = c * dx + s * dy, ly = -s * dx + c * dy;
    if (std::abs(lx) <= hl && std::abs(ly) <= hw && p.z() >= z_lo && p.z() <= z_hi) ++n;
  }
  return n;
}

std::vector<FramePair> select_split(const std::vector<FramePair>& pairs, SplitSelection sel, std::uint64_t seed) {
  if (sel == SplitSelection::kAll) return pairs;
  const bool scenes = !pairs.empty() && std::all_of(pairs.begin(), pairs.end(), [](const FramePair& p) {
    return p.vehicle->scene_id.has_value();
  });
  auto parts = split(pairs, SplitRatios{}, seed, scenes ? SplitUnit::kScene : SplitUnit::kPair);
  switch (sel) {
    case SplitSelection::kTrain: return parts.train;
    case SplitSelection::kValid: return parts.valid;
    default: return parts.test;
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::string dataset_label(std::size_t k) { return k == 0 ? "VIC-Sync" : fmt::format("VIC-Async-{}", k); }

std::string ap_cell(const std::optional<double>& ap) { return ap ? fmt::format("{:.2f}", 100.0 * *ap) : "-"; }

template <typename Fn>
int run_command(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    std::cerr << "vicfuse " << name << ": error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

std::string to_string(Pipeline p) {
  for (const auto& [pipe, name] : kPipelineNames) {
    if (pipe == p) return name;
  }
  return "unknown";
}

Pipeline pipeline_from_string(const std::string& s) {
  for (const auto& [pipe, name] : kPipelineNames) {
    if (s == name) return pipe;
  }
  throw ConfigError("pipeline", "unknown pipeline '" + s + "'");
}

CloudDetector oracle_cloud_detector(std::size_t min_points) {
  return [min_points](const PointCloud& merged, const FramePair& pair) {
    if (!pair.vehicle->annotations) throw MissingAnnotations("early fusion oracle needs vehicle annotations");
    Detections out;
    for (const auto& gt : *pair.vehicle->annotations) {
      const std::size_t n = points_in_box(merged, gt.box, 0.05);
      if (n < std::max<std::size_t>(min_points, 1)) continue;
      Detection d = gt;
      d.score = static_cast<double>(n) / static_cast<double>(n + min_points);
      out.push_back(d);
    }
    return out;
  };
}

json to_json(const BenchConfig& cfg) {
  json pipes = json::array();
  for (auto p : cfg.pipelines) pipes.push_back(to_string(p));
  json bins = json::array();
  for (const auto& b : cfg.eval.range_bins) bins.push_back({b.min, b.max});
  json metrics = json::array();
  for (auto m : cfg.metrics) metrics.push_back(metric_key(m));
  return {
      {"pipelines", pipes},
      {"async_ks", cfg.async_ks},
      {"pairing",
       {{"max_dt", cfg.pairing.max_dt},
        {"history_depth", cfg.pairing.history_depth},
        {"policy", cfg.pairing.policy == PairingPolicy::kNearestEarlier ? "nearest_earlier" : "absolute_nearest"}}},
      {"fusion",
       {{"match_dist", cfg.fusion.match_dist},
        {"score_rule", cfg.fusion.score_rule == ScoreRule::kKeepVehicle ? "keep_vehicle" : "keep_higher_score"},
        {"velocity_fallback", cfg.fusion.velocity_fallback == VelocityFallback::kZero ? "zero" : "scene_mean"},
        {"class_constrained", cfg.fusion.class_constrained},
        {"max_speed", cfg.fusion.max_speed},
        {"planarity_tol", cfg.fusion.planarity_tol}}},
      {"eval",
       {{"iou_threshold", cfg.eval.iou_threshold},
        {"interpolation", cfg.eval.interpolation == Interpolation::kRecall40 ? "r40" : "r11"},
        {"range_bins", bins},
        {"area", {cfg.eval.area.x_min, cfg.eval.area.y_min, cfg.eval.area.x_max, cfg.eval.area.y_max}},
        {"class_id", cfg.eval.class_id ? json(*cfg.eval.class_id) : json(nullptr)}}},
      {"metrics", metrics},
      {"split", split_key(cfg.split)},
      {"split_seed", cfg.split_seed},
      {"early_min_points", cfg.early_min_points},
  };
}

BenchConfig bench_config_from_json(const json& j, BenchConfig base) {
  auto field = [](const char* name, auto&& fn) {
    try {
      fn();
    } catch (const json::exception& e) {
      throw ConfigError(name, e.what());
    }
  };
  if (!j.is_object()) throw ConfigError("", "bench config must be a JSON object");
  if (j.contains("pipelines")) {
    base.pipelines.clear();
    for (const auto& p : j["pipelines"]) base.pipelines.push_back(pipeline_from_string(p.get<std::string>()));
  }
  if (j.contains("async_ks")) field("async_ks", [&] { base.async_ks = j["async_ks"].get<std::vector<std::size_t>>(); });
  if (j.contains("pairing")) {
    const auto& p = j["pairing"];
    field("pairing", [&] {
      base.pairing.max_dt = p.value("max_dt", base.pairing.max_dt);
      base.pairing.history_depth = p.value("history_depth", base.pairing.history_depth);
      if (p.contains("policy")) {
        const auto s = p["policy"].get<std::string>();
        if (s == "nearest_earlier") {
          base.pairing.policy = PairingPolicy::kNearestEarlier;
        } else if (s == "absolute_nearest") {
          base.pairing.policy = PairingPolicy::kAbsoluteNearest;
        } else {
          throw ConfigError("pairing.policy", "unknown policy '" + s + "'");
        }
      }
    });
  }
  if (j.contains("fusion")) {
    const auto& f = j["fusion"];
    field("fusion", [&] {
      base.fusion.match_dist = f.value("match_dist", base.fusion.match_dist);
      base.fusion.class_constrained = f.value("class_constrained", base.fusion.class_constrained);
      base.fusion.max_speed = f.value("max_speed", base.fusion.max_speed);
      base.fusion.planarity_tol = f.value("planarity_tol", base.fusion.planarity_tol);
      if (f.contains("score_rule")) {
        const auto s = f["score_rule"].get<std::string>();
        if (s == "keep_vehicle") {
          base.fusion.score_rule = ScoreRule::kKeepVehicle;
        } else if (s == "keep_higher_score") {
          base.fusion.score_rule = ScoreRule::kKeepHigherScore;
        } else {
          throw ConfigError("fusion.score_rule", "unknown rule '" + s + "'");
        }
      }
      if (f.contains("velocity_fallback")) {
        const auto s = f["velocity_fallback"].get<std::string>();
        if (s == "zero") {
          base.fusion.velocity_fallback = VelocityFallback::kZero;
        } else if (s == "scene_mean") {
          base.fusion.velocity_fallback = VelocityFallback::kSceneMean;
        } else {
          throw ConfigError("fusion.velocity_fallback", "unknown fallback '" + s + "'");
        }
      }
    });
  }
  if (j.contains("eval")) {
    const auto& e = j["eval"];
    field("eval", [&] {
      base.eval.iou_threshold = e.value("iou_threshold", base.eval.iou_threshold);
      if (e.contains("interpolation")) {
        const auto s = e["interpolation"].get<std::string>();
        if (s == "r40") {
          base.eval.interpolation = Interpolation::kRecall40;
        } else if (s == "r11") {
          base.eval.interpolation = Interpolation::kRecall11;
        } else {
          throw ConfigError("eval.interpolation", "expected r40 or r11");
        }
      }
      if (e.contains("range_bins")) {
        base.eval.range_bins.clear();
        for (const auto& b : e["range_bins"]) base.eval.range_bins.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
      }
      if (e.contains("area")) {
        const auto a = e["area"].get<std::vector<double>>();
        if (a.size() != 4) throw ConfigError("eval.area", "expected [x_min, y_min, x_max, y_max]");
        base.eval.area = {a[0], a[1], a[2], a[3]};
      }
      if (e.contains("class_id")) {
        base.eval.class_id = e["class_id"].is_null() ? std::nullopt
                                                     : std::optional<std::uint8_t>(e["class_id"].get<std::uint8_t>());
      }
    });
  }
  if (j.contains("metrics")) {
    base.metrics.clear();
    for (const auto& m : j["metrics"]) base.metrics.push_back(metric_from_key(m.get<std::string>()));
  }
  if (j.contains("split")) base.split = split_from_key(j["split"].get<std::string>());
  if (j.contains("split_seed")) field("split_seed", [&] { base.split_seed = j["split_seed"].get<std::uint64_t>(); });
  if (j.contains("early_min_points")) {
    field("early_min_points", [&] { base.early_min_points = j["early_min_points"].get<std::size_t>(); });
  }
  return base;
}

PipelineRun run_pipeline(const std::vector<FramePair>& pairs, Pipeline pipeline, const BenchConfig& cfg,
                         const CloudDetector& detector) {
  const std::size_t n = pairs.size();
  PipelineRun run;
  run.outputs.resize(n);
  run.transmitted.resize(n);
  run.artifacts.resize(n);
  std::vector<std::string> errors(n);

  parallel_for(n, cfg.workers, [&](std::size_t i) {
    const FramePair& pair = pairs[i];
    PairArtifact& art = run.artifacts[i];
    try {
      art.pair = i;
      art.vehicle_t = pair.vehicle->timestamp;
      art.delta_t = pair.delta_t;
      if (pair.vehicle->annotations) art.ground_truth = *pair.vehicle->annotations;
      if (pair.vehicle->detections) art.vehicle = *pair.vehicle->detections;
      switch (pipeline) {
        case Pipeline::kVehOnly:
          run.outputs[i] = veh_only(pair);
          break;
        case Pipeline::kInfOnly: {
          if (!pair.infrastructure->detections) throw MissingDetections("infrastructure frame has no detections");
          run.outputs[i] = inf_only(pair, cfg.fusion.planarity_tol);
          art.infrastructure = run.outputs[i];
          run.transmitted[i] = {encode_objects(*pair.infrastructure->detections)};
          break;
        }
        case Pipeline::kLate: {
          auto out = late_fuse(pair, cfg.fusion);
          art.infrastructure = inf_only(pair, cfg.fusion.planarity_tol);
          run.outputs[i] = std::move(out.detections);
          run.transmitted[i] = std::move(out.transmitted);
          break;
        }
        case Pipeline::kTclf: {
          auto out = tclf(pair, cfg.fusion);
          art.infrastructure = compensate(pair, cfg.fusion);
          run.outputs[i] = std::move(out.detections);
          run.transmitted[i] = std::move(out.transmitted);
          break;
        }
        case Pipeline::kEarly: {
          auto out = early_fuse(pair);
          run.outputs[i] = detector(out.cloud, pair);
          if (pair.infrastructure->detections) art.infrastructure = inf_only(pair, cfg.fusion.planarity_tol);
          run.transmitted[i] = {std::move(out.transmitted)};
          break;
        }
      }
      art.fused = run.outputs[i];
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  std::size_t failed = 0;
  std::string summary;
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i].empty()) continue;
    if (failed < 5) summary += fmt::format("\n  pair {} (t={:.3f}): {}", i, pairs[i].vehicle->timestamp, errors[i]);
    ++failed;
  }
  if (failed > 0) {
    throw Error(fmt::format("{} failed on {} of {} pairs:{}", to_string(pipeline), failed, n, summary));
  }
  return run;
}

BenchReport run_bench(const std::vector<Frame>& vehicle, const std::vector<Frame>& infrastructure,
                      const BenchConfig& cfg, const CloudDetector& detector,
                      std::vector<std::vector<PairArtifact>>* artifacts) {
  validate(cfg.fusion);
  validate(cfg.eval);
  if (cfg.pipelines.empty()) throw ConfigError("pipelines", "no pipeline selected");
  if (cfg.metrics.empty()) throw ConfigError("metrics", "no metric selected");
  if (cfg.pairing.history_depth == 0) throw ConfigError("pairing.history_depth", "must be at least 1");
  for (auto k : cfg.async_ks) {
    if (k >= cfg.pairing.history_depth) {
      throw ConfigError("async_ks", fmt::format("k={} needs history depth above {}, have {}", k, k,
                                                cfg.pairing.history_depth));
    }
  }

  const auto veh_refs = share_frames(vehicle);
  const auto inf_refs = share_frames(infrastructure);
  auto paired = pair_streams(veh_refs, inf_refs, cfg.pairing);

  BenchReport report;
  json hashed = to_json(cfg);
  report.config_hash = fnv1a_hex(hashed.dump());
  report.unpaired = paired.skipped;

  std::vector<FramePair> full;
  for (auto& p : paired.pairs) {
    if (p.inf_history.size() >= cfg.pairing.history_depth) {
      full.push_back(std::move(p));
    } else {
      ++report.short_history;
    }
  }
  const auto selected = select_split(full, cfg.split, cfg.split_seed);
  spdlog::info("bench: {} pairs ({} unpaired, {} short history)", selected.size(), report.unpaired,
               report.short_history);

  std::vector<Detections> gt(selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    if (!selected[i].vehicle->annotations) {
      throw MissingAnnotations(
          fmt::format("vehicle frame at t={:.3f} has no annotations", selected[i].vehicle->timestamp));
    }
    gt[i] = *selected[i].vehicle->annotations;
  }

  for (auto pipeline : cfg.pipelines) {
    for (auto k : cfg.async_ks) {
      const auto shifted = make_async_k(selected, k);
      auto run = run_pipeline(shifted.pairs, pipeline, cfg, detector);
      BenchRow row;
      row.pipeline = pipeline;
      row.k = k;
      row.num_pairs = shifted.pairs.size();
      for (auto metric : cfg.metrics) {
        EvalConfig ec = cfg.eval;
        ec.metric = metric;
        row.reports.push_back(range_binned_ap(run.outputs, gt, ec));
      }
      row.average_byte = average_byte(run.transmitted);
      spdlog::debug("bench: {} k={} done", to_string(pipeline), k);
      report.rows.push_back(std::move(row));
      if (artifacts) artifacts->push_back(std::move(run.artifacts));
    }
  }
  return report;
}

json to_json(const BenchReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    json metrics = json::object();
    for (const auto& e : r.reports) metrics[to_string(e.metric)] = to_json(e);
    rows.push_back({{"pipeline", to_string(r.pipeline)},
                    {"k", r.k},
                    {"dataset", dataset_label(r.k)},
                    {"pairs", r.num_pairs},
                    {"metrics", metrics},
                    {"average_byte", r.average_byte}});
  }
  return {{"config_hash", report.config_hash},
          {"inputs_hash", report.inputs_hash},
          {"unpaired", report.unpaired},
          {"short_history", report.short_history},
          {"rows", rows}};
}

std::string format_table(const BenchReport& report, const BenchConfig& cfg) {
  std::vector<std::string> labels = {"Overall"};
  for (const auto& b : cfg.eval.range_bins) labels.push_back(b.label());

  std::string out = fmt::format("{:<10}{:<14}{:>6}", "Pipeline", "Dataset", "Pairs");
  for (auto m : cfg.metrics) {
    out += fmt::format(" | {:<{}}", fmt::format("{}(IoU={})", to_string(m), cfg.eval.iou_threshold),
                       9 * labels.size());
  }
  out += fmt::format(" | {:>12}\n", "AB (Byte)");
  out += fmt::format("{:<10}{:<14}{:>6}", "", "", "");
  for (std::size_t m = 0; m < cfg.metrics.size(); ++m) {
    out += " |";
    for (const auto& l : labels) out += fmt::format("{:>9}", l);
  }
  out += fmt::format(" | {:>12}\n", "");
  for (const auto& r : report.rows) {
    out += fmt::format("{:<10}{:<14}{:>6}", to_string(r.pipeline), dataset_label(r.k), r.num_pairs);
    for (const auto& e : r.reports) {
      out += " |";
      out += fmt::format("{:>9}", ap_cell(e.overall.ap));
      for (const auto& b : e.bins) out += fmt::format("{:>9}", ap_cell(b.ap));
    }
    out += fmt::format(" | {:>12.1f}\n", r.average_byte);
  }
  return out;
}

json to_json(const PairArtifact& a) {
  return {{"pair", a.pair},
          {"vehicle_t", a.vehicle_t},
          {"delta_t", a.delta_t},
          {"gt", to_json(a.ground_truth)},
          {"vehicle", to_json(a.vehicle)},
          {"infrastructure", to_json(a.infrastructure)},
          {"fused", to_json(a.fused)}};
}

PairArtifact pair_artifact_from_json(const json& j) {
  PairArtifact a;
  a.pair = j.at("pair").get<std::size_t>();
  a.vehicle_t = j.at("vehicle_t").get<double>();
  a.delta_t = j.at("delta_t").get<double>();
  a.ground_truth = detections_from_json(j.at("gt"));
  a.vehicle = detections_from_json(j.at("vehicle"));
  a.infrastructure = detections_from_json(j.at("infrastructure"));
  a.fused = detections_from_json(j.at("fused"));
  return a;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return fmt::format("{:016x}", h);
}

std::string artifact_file_name(Pipeline p, std::size_t k) { return fmt::format("pairs_{}_k{}.jsonl", to_string(p), k); }

int cmd_simulate(const SimulateOptions& opts) {
  return run_command("simulate", [&] {
    ScenarioConfig cfg = opts.config ? load_scenario(opts.config->string()) : make_preset(opts.preset, opts.seed.value_or(0));
    if (opts.config && opts.seed) cfg.seed = *opts.seed;
    validate(cfg);
    const auto streams = sample_streams(cfg, opts.workers);
    std::filesystem::create_directories(opts.out);
    const std::string veh = dump_frames(streams.vehicle);
    const std::string inf = dump_frames(streams.infrastructure);
    const std::string scenario = to_json(cfg).dump(2) + "\n";
    write_file(opts.out / "vehicle.jsonl", veh);
    write_file(opts.out / "infrastructure.jsonl", inf);
    write_file(opts.out / "scenario.json", scenario);
    const json manifest = {{"scenario", cfg.name},
                           {"seed", cfg.seed},
                           {"scenario_hash", fnv1a_hex(scenario)},
                           {"vehicle_frames", streams.vehicle.size()},
                           {"infrastructure_frames", streams.infrastructure.size()},
                           {"files", {"vehicle.jsonl", "infrastructure.jsonl", "scenario.json"}}};
    write_file(opts.out / "manifest.json", manifest.dump(2) + "\n");
    std::cout << fmt::format("wrote {} vehicle and {} infrastructure frames to {}\n", streams.vehicle.size(),
                             streams.infrastructure.size(), opts.out.string());
    return 0;
  });
}

int cmd_bench(const BenchOptions& opts) {
  return run_command("bench", [&] {
    BenchConfig cfg;
    if (opts.config) {
      json j;
      try {
        j = json::parse(read_file(*opts.config));
      } catch (const json::exception& e) {
        throw ConfigError(opts.config->string(), e.what());
      }
      cfg = bench_config_from_json(j, cfg);
    }
    if (!opts.pipelines.empty()) {
      cfg.pipelines.clear();
      for (const auto& p : opts.pipelines) cfg.pipelines.push_back(pipeline_from_string(p));
    }
    if (!opts.async_ks.empty()) cfg.async_ks = opts.async_ks;
    if (opts.iou) cfg.eval.iou_threshold = *opts.iou;
    if (opts.metric) cfg.metrics = metrics_from_option(*opts.metric);
    if (opts.seed) cfg.split_seed = *opts.seed;
    if (opts.split) cfg.split = split_from_key(*opts.split);
    cfg.workers = opts.workers;

    const std::string veh_text = read_file(opts.streams / "vehicle.jsonl");
    const std::string inf_text = read_file(opts.streams / "infrastructure.jsonl");
    const auto vehicle = parse_frames(veh_text);
    const auto infrastructure = parse_frames(inf_text);

    std::vector<std::vector<PairArtifact>> artifacts;
    auto detector = oracle_cloud_detector(cfg.early_min_points);
    BenchReport report = run_bench(vehicle, infrastructure, cfg, detector, &artifacts);
    report.inputs_hash = fnv1a_hex(veh_text + '\0' + inf_text);

    std::filesystem::create_directories(opts.out);
    json full = to_json(report);
    full["config"] = to_json(cfg);
    write_file(opts.out / "report.json", full.dump(2) + "\n");
    const std::string table = format_table(report, cfg);
    write_file(opts.out / "report.txt", table);
    for (std::size_t r = 0; r < report.rows.size(); ++r) {
      std::string lines;
      for (const auto& a : artifacts[r]) lines += to_json(a).dump() + "\n";
      write_file(opts.out / artifact_file_name(report.rows[r].pipeline, report.rows[r].k), lines);
    }
    std::cout << table;
    return 0;
  });
}

}  // namespace vicfuse

#include <string>
#include <vector>

#include "CLI11.hpp"

#include "vicfuse/bench.hpp"
#include "vicfuse/log.hpp"
#include "vicfuse/simulation.hpp"

int main(int argc, char** argv) {
  vicfuse::configure_logging();

  CLI::App app{"Vehicle-infrastructure cooperative 3D detection toolkit"};
  app.require_subcommand(1);

  vicfuse::SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Generate synchronized vehicle and roadside frame streams");
  std::string sim_config;
  std::uint64_t sim_seed = 0;
  simulate->add_option("--config", sim_config, "Scenario JSON file (overrides --preset)");
  simulate->add_option("--preset", sim.preset, "Built-in scenario")
      ->check(CLI::IsMember(vicfuse::preset_names()));
  auto* sim_seed_opt = simulate->add_option("--seed", sim_seed, "Random seed");
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--workers", sim.workers, "Worker threads")->check(CLI::PositiveNumber);

  vicfuse::BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run fusion pipelines over streams and report AP and AB");
  std::string bench_config, metric, split_name;
  double iou = 0.5;
  std::uint64_t bench_seed = 0;
  bench_cmd->add_option("--streams", bench.streams, "Directory written by simulate")->required();
  bench_cmd->add_option("--out", bench.out, "Output directory")->required();
  bench_cmd->add_option("--config", bench_config, "Bench config JSON");
  bench_cmd->add_option("--pipeline", bench.pipelines, "veh_only, inf_only, late, early, tclf")->delimiter(',');
  bench_cmd->add_option("--async-k", bench.async_ks, "Frame offsets to evaluate")->delimiter(',');
  auto* iou_opt = bench_cmd->add_option("--iou", iou, "IoU threshold")->check(CLI::Range(0.0, 1.0));
  auto* metric_opt =
      bench_cmd->add_option("--metric", metric, "3d, bev or both")->check(CLI::IsMember({"3d", "bev", "both"}));
  auto* seed_opt = bench_cmd->add_option("--seed", bench_seed, "Split seed");
  auto* split_opt = bench_cmd->add_option("--split", split_name, "all, train, valid or test")
                        ->check(CLI::IsMember({"all", "train", "valid", "test"}));
  bench_cmd->add_option("--workers", bench.workers, "Worker threads")->check(CLI::PositiveNumber);

  vicfuse::PlotOptions plot;
  auto* plot_cmd = app.add_subcommand("plot", "Render one evaluated pair as a bird's-eye SVG");
  plot_cmd->add_option("--bench", plot.bench, "Directory written by bench")->required();
  plot_cmd->add_option("--pipeline", plot.pipeline, "Pipeline name");
  plot_cmd->add_option("--async-k", plot.k, "Frame offset");
  plot_cmd->add_option("--pair", plot.pair, "Pair index");
  plot_cmd->add_option("--out", plot.out, "Output SVG path")->required();

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) {
    if (!sim_config.empty()) sim.config = sim_config;
    if (*sim_seed_opt) sim.seed = sim_seed;
    return vicfuse::cmd_simulate(sim);
  }
  if (bench_cmd->parsed()) {
    if (!bench_config.empty()) bench.config = bench_config;
    if (*iou_opt) bench.iou = iou;
    if (*metric_opt) bench.metric = metric;
    if (*seed_opt) bench.seed = bench_seed;
    if (*split_opt) bench.split = split_name;
    return vicfuse::cmd_bench(bench);
  }
  return vicfuse::cmd_plot(plot);
}

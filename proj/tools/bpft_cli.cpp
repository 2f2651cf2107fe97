// bpft command line: run experiments, compare tree snapshots, time the entropy estimator.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bpft/harness/bench.hpp"
#include "bpft/harness/experiment.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw bpft::IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bpft::IoError("cannot write " + path);
  out << text;
}

int cmd_run(const std::string& spec_path, const std::string& out, std::size_t workers, bool verify_set, bool verify,
            const std::string& trajectories, bool quiet) {
  auto spec = bpft::harness::load_experiment_spec(spec_path);
  if (!out.empty()) {
    // a directory (or a path without an extension) gets results.csv inside it
    const std::filesystem::path p(out);
    spec.output = std::filesystem::is_directory(p) || !p.has_extension() ? (p / "results.csv").string() : out;
  }
  if (workers > 0) spec.workers = workers;
  if (verify_set) spec.verify = verify;
  if (!trajectories.empty()) spec.trajectory_dir = trajectories;
  spec.validate();

  auto log = [&](const std::string& line) {
    if (!quiet) std::cerr << line << '\n';
  };
  bpft::harness::RunReport report;
  try {
    report = bpft::harness::run_experiment(spec, log);
  } catch (const bpft::harness::DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  bpft::harness::export_report(report, spec.output);
  for (const auto& r : report.rows) {
    std::printf("%-16s baseline %.4f +- %.4f s  bounded %.4f +- %.4f s  speedup %.3f  %s\n", r.row.label().c_str(),
                r.baseline.mean_time_s, r.baseline.stderr_s, r.bounded.mean_time_s, r.bounded.stderr_s, r.speedup,
                r.consistent ? "identical" : "DIVERGED");
  }
  std::printf("wrote %s and %s\n", spec.output.c_str(), bpft::harness::sidecar_path(spec.output).string().c_str());
  return report.consistent() ? 0 : 2;
}

int cmd_diff(const std::string& lhs, const std::string& rhs) {
  const auto cmp = bpft::compare_snapshots(read_file(lhs), read_file(rhs));
  if (cmp.equal) {
    std::cout << "trees identical\n";
    return 0;
  }
  std::cout << "trees differ at " << cmp.first_divergence.value_or("r") << '\n';
  return 1;
}

int cmd_bench(const std::vector<std::size_t>& ms, int levels, std::uint64_t seed, double min_seconds,
              const std::string& json_out) {
  std::vector<bpft::harness::EntropyTiming> rows;
  std::printf("%8s %14s %8s", "m", "exact_s", "ratio");
  for (int s = 1; s <= levels; ++s) std::printf(" %13s%d", "level", s);
  std::printf("\n");
  for (std::size_t i = 0; i < ms.size(); ++i) {
    rows.push_back(bpft::harness::bench_entropy(ms[i], levels, seed, min_seconds));
    const auto& t = rows.back();
    const double ratio = i > 0 ? t.exact_s / rows[i - 1].exact_s : 0.0;
    std::printf("%8zu %14.6e %8.3f", t.m, t.exact_s, ratio);
    for (double v : t.level_s) std::printf(" %14.6e", v);
    std::printf("\n");
  }
  if (!json_out.empty()) write_file(json_out, nlohmann::json(rows).dump(2) + "\n");
  return 0;
}

int cmd_plan(const std::string& config_path, const std::string& algorithm, const std::string& snapshot_out,
             const std::string& report_out) {
  bpft::harness::ExperimentSpec spec;
  if (!config_path.empty()) spec = bpft::harness::load_experiment_spec(config_path);
  const bpft::lightdark::LightDarkModel model(spec.environment);
  bpft::PlannerConfig cfg = spec.planner;
  const auto& row = spec.rows.front();
  cfg.m = row.m;
  cfg.d_max = row.d_max;
  cfg.n_iter = row.n_iter;
  bpft::SeededStream rng(cfg.seed);
  auto belief_rng = rng.fork("initial-belief");
  const auto b0 = bpft::lightdark::initial_belief(spec.environment, cfg.m, belief_rng);

  bpft::PlanResult<bpft::lightdark::Point, bpft::lightdark::Point> result;
  if (algorithm == "baseline") {
    result = bpft::PftDpwPlanner<bpft::lightdark::LightDarkModel>(model, cfg).plan(b0);
  } else {
    result = bpft::BoundedPftPlanner<bpft::lightdark::LightDarkModel>(model, cfg,
                                                                      bpft::harness::parse_strategy(algorithm))
                 .plan(b0);
  }
  if (!snapshot_out.empty()) write_file(snapshot_out, bpft::tree_snapshot(*result.tree));
  const std::string report = nlohmann::json(result.report).dump(2) + "\n";
  if (report_out.empty()) {
    std::cout << report;
  } else {
    write_file(report_out, report);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online POMDP planning with exact and bounded entropy rewards"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a light-dark experiment from a config file");
  std::string spec_path;
  std::string out;
  std::size_t workers = 0;
  bool verify = true;
  std::string trajectories;
  bool quiet = false;
  run->add_option("--spec", spec_path, "experiment INI file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory, or CSV path (the JSON file is written next to it)");
  run->add_option("--workers", workers, "parallel episodes")->check(CLI::PositiveNumber);
  auto* verify_flag = run->add_flag("--verify,!--no-verify", verify, "compare tree digests of both planners");
  run->add_option("--trajectories", trajectories, "directory for per-episode trajectory CSVs");
  run->add_flag("-q,--quiet", quiet, "no progress lines");

  auto* diff = app.add_subcommand("diff-trees", "compare two tree snapshot files");
  std::string lhs;
  std::string rhs;
  diff->add_option("lhs", lhs)->required()->check(CLI::ExistingFile);
  diff->add_option("rhs", rhs)->required()->check(CLI::ExistingFile);

  auto* bench = app.add_subcommand("bench-entropy", "time the entropy estimator and its bounds");
  std::vector<std::size_t> ms{100, 200, 400, 800};
  int levels = 4;
  std::uint64_t seed = 1;
  double min_seconds = 0.2;
  std::string bench_json;
  bench->add_option("--m", ms, "particle counts")->delimiter(',');
  bench->add_option("--levels", levels, "simplification levels")->check(CLI::PositiveNumber);
  bench->add_option("--seed", seed);
  bench->add_option("--min-seconds", min_seconds, "time budget per measurement");
  bench->add_option("--json", bench_json, "write timings as JSON");

  auto* plan = app.add_subcommand("plan", "one planning session from the initial belief");
  std::string config_path;
  std::string algorithm = "specific";
  std::string snapshot_out;
  std::string report_out;
  plan->add_option("--config", config_path, "experiment INI file (first row is used)")->check(CLI::ExistingFile);
  plan->add_option("--algorithm", algorithm, "baseline, specific or brute-force")
      ->check(CLI::IsMember({"baseline", "specific", "brute-force"}));
  plan->add_option("--snapshot", snapshot_out, "write the tree snapshot here");
  plan->add_option("--report", report_out, "write the plan report JSON here");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(spec_path, out, workers, verify_flag->count() > 0, verify, trajectories, quiet);
    if (*diff) return cmd_diff(lhs, rhs);
    if (*bench) return cmd_bench(ms, levels, seed, min_seconds, bench_json);
    if (*plan) return cmd_plan(config_path, algorithm, snapshot_out, report_out);
  } catch (const bpft::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

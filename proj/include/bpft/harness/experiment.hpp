#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "bpft/core/config.hpp"
#include "bpft/core/errors.hpp"
#include "bpft/core/rng.hpp"
#include "bpft/filter/particle_filter.hpp"
#include "bpft/lightdark/lightdark.hpp"
#include "bpft/planner/bounded_pft.hpp"
#include "bpft/planner/pft_dpw.hpp"
#include "bpft/planner/report.hpp"
#include "bpft/planner/snapshot.hpp"

namespace bpft::harness {

/// One (m, d, n_iter) configuration.
struct ExperimentRow {
  std::size_t m = 50;
  int d_max = 30;
  std::size_t n_iter = 200;

  [[nodiscard]] std::string label() const {
    return "(" + std::to_string(m) + "," + std::to_string(d_max) + "," + std::to_string(n_iter) + ")";
  }
  friend bool operator==(const ExperimentRow&, const ExperimentRow&) = default;
};

/// Parses "50,30,200; 100,30,200".
inline std::vector<ExperimentRow> parse_rows(const std::string& text) {
  std::vector<ExperimentRow> rows;
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::replace(item.begin(), item.end(), ',', ' ');
    std::istringstream in(item);
    long long m = 0;
    long long d = 0;
    long long n = 0;
    std::string rest;
    if (!(in >> m >> d >> n) || (in >> rest) || m < 1 || d < 1 || n < 1) {
      throw ConfigError("bad experiment row '" + item + "', expected m,d,n_iter");
    }
    rows.push_back({static_cast<std::size_t>(m), static_cast<int>(d), static_cast<std::size_t>(n)});
  }
  if (rows.empty()) throw ConfigError("experiment lists no rows");
  return rows;
}

inline std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::string item;
  std::stringstream all(text);
  while (std::getline(all, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad seed '" + item + "'");
    }
  }
  return seeds;
}

struct ExperimentSpec {
  std::vector<ExperimentRow> rows{{50, 30, 200}};
  std::size_t sessions = 10;
  std::size_t repetitions = 25;
  /// Episode seeds; repetition r uses seeds[r % size], or r + 1 when empty.
  std::vector<std::uint64_t> seeds;
  PlannerConfig planner;
  lightdark::LightDarkConfig environment;
  ResimplificationStrategy strategy = ResimplificationStrategy::specific;
  std::size_t workers = 1;
  bool verify = true;
  std::string output = "results.csv";
  std::string trajectory_dir;  ///< empty: no trajectory files

  void validate() const {
    if (rows.empty()) throw ConfigError("experiment lists no rows");
    if (sessions < 1) throw ConfigError("sessions must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    planner.validate();
    environment.validate();
  }

  [[nodiscard]] std::uint64_t episode_seed(std::size_t repetition) const {
    return seeds.empty() ? repetition + 1 : seeds[repetition % seeds.size()];
  }
};

inline ResimplificationStrategy parse_strategy(const std::string& name) {
  if (name == "specific") return ResimplificationStrategy::specific;
  if (name == "brute-force" || name == "brute_force") return ResimplificationStrategy::brute_force;
  throw ConfigError("unknown resimplification strategy '" + name + "'");
}

/// Reads [experiment], [planner] and [lightdark] sections of an INI file.
///
/// The planner's lambda follows [lightdark] lambda unless [planner] sets it.
inline ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  const auto tree = detail::read_ini(path);
  ExperimentSpec spec;
  const boost::property_tree::ptree empty;
  const auto& ex = tree.get_child("experiment", empty);
  if (auto rows = ex.get_optional<std::string>("rows")) spec.rows = parse_rows(*rows);
  detail::read_key(ex, "sessions", spec.sessions);
  detail::read_key(ex, "repetitions", spec.repetitions);
  detail::read_key(ex, "workers", spec.workers);
  detail::read_key(ex, "verify", spec.verify);
  detail::read_key(ex, "output", spec.output);
  detail::read_key(ex, "trajectories", spec.trajectory_dir);
  if (auto seeds = ex.get_optional<std::string>("seeds")) spec.seeds = parse_seeds(*seeds);
  if (auto s = ex.get_optional<std::string>("strategy")) spec.strategy = parse_strategy(*s);

  lightdark::apply_lightdark_keys(tree.get_child("lightdark", empty), spec.environment);
  spec.planner.lambda = spec.environment.lambda;
  apply_planner_keys(tree.get_child("planner", empty), spec.planner);
  spec.validate();
  return spec;
}

/// One planning session: both planners on the same belief.
struct SessionRecord {
  std::size_t row = 0;
  std::size_t repetition = 0;
  std::size_t session = 0;
  bool baseline_first = true;
  PlanReport baseline;
  PlanReport bounded;
  bool consistent = true;
  std::string divergence;  ///< first differing snapshot path when inconsistent

  friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

/// Aggregate for one row and one algorithm.
struct AlgorithmSummary {
  std::string algorithm;
  double mean_time_s = 0.0;  ///< mean over repetitions of the summed session times
  double stderr_s = 0.0;
  std::size_t sessions = 0;
  std::size_t resimplifications = 0;
  std::size_t refinements = 0;
  std::vector<std::size_t> level_histogram;
  std::size_t transition_evaluations = 0;

  friend bool operator==(const AlgorithmSummary&, const AlgorithmSummary&) = default;
};

struct RowSummary {
  ExperimentRow row;
  AlgorithmSummary baseline;
  AlgorithmSummary bounded;
  bool consistent = true;
  double speedup = 0.0;  ///< baseline mean time / bounded mean time

  friend bool operator==(const RowSummary&, const RowSummary&) = default;
};

struct RunReport {
  std::vector<RowSummary> rows;
  std::vector<SessionRecord> sessions;
  std::size_t repetitions = 0;
  std::size_t sessions_per_repetition = 0;
  std::string strategy;

  [[nodiscard]] bool consistent() const {
    return std::all_of(rows.begin(), rows.end(), [](const RowSummary& r) { return r.consistent; });
  }
  friend bool operator==(const RunReport&, const RunReport&) = default;
};

/// Thrown when the two planners disagree and the run was asked to stop.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::string path) : Error(what), path_(std::move(path)) {}
  [[nodiscard]] const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct TrajectoryStep {
  std::size_t step = 0;
  lightdark::Point state{};
  lightdark::Point belief_mean{};
  Action action = 0;
  double reward = 0.0;
};

namespace detail {

inline double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

/// Standard error of the mean (sample standard deviation / sqrt(n)); 0 for n < 2.
inline double stderr_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
}

struct EpisodeResult {
  std::vector<SessionRecord> sessions;
  std::vector<TrajectoryStep> trajectory;
  double baseline_time = 0.0;
  double bounded_time = 0.0;
  std::optional<std::string> failure;
};

inline std::uint64_t session_seed(std::uint64_t episode_seed, std::size_t session) {
  return bpft::detail::splitmix64(episode_seed ^ bpft::detail::splitmix64(0x5e55100000000000ULL + session));
}

/// Runs one episode of `spec.sessions` planning sessions in the light-dark environment.
inline EpisodeResult run_episode(const ExperimentSpec& spec, std::size_t row_index, std::size_t repetition,
                                 const std::atomic<bool>& stop) {
  const ExperimentRow& row = spec.rows[row_index];
  const lightdark::LightDarkModel model(spec.environment);
  const std::uint64_t seed = spec.episode_seed(repetition);
  SeededStream base(seed);
  SeededStream world = base.fork("world");
  SeededStream belief_rng = base.fork("initial-belief");

  lightdark::Point state{spec.environment.initial_mean[0] + spec.environment.sigma_initial[0] * world.normal(),
                         spec.environment.initial_mean[1] + spec.environment.sigma_initial[1] * world.normal()};
  ParticleBelief<lightdark::Point> belief = lightdark::initial_belief(spec.environment, row.m, belief_rng);

  PlannerConfig config = spec.planner;
  config.m = row.m;
  config.d_max = row.d_max;
  config.n_iter = row.n_iter;

  EpisodeResult out;
  const bool baseline_first = repetition % 2 == 0;
  for (std::size_t s = 0; s < spec.sessions && !stop.load(); ++s) {
    config.seed = session_seed(seed, s);
    PftDpwPlanner<lightdark::LightDarkModel> baseline(model, config);
    BoundedPftPlanner<lightdark::LightDarkModel> bounded(model, config, spec.strategy);
    baseline.set_compute_digest(spec.verify);
    bounded.set_compute_digest(spec.verify);

    std::optional<PlanResult<lightdark::Point, lightdark::Point>> rb;
    std::optional<PlanResult<lightdark::Point, lightdark::Point>> rs;
    if (baseline_first) {
      rb = baseline.plan(belief);
      rs = bounded.plan(belief);
    } else {
      rs = bounded.plan(belief);
      rb = baseline.plan(belief);
    }
    SessionRecord record;
    record.row = row_index;
    record.repetition = repetition;
    record.session = s;
    record.baseline_first = baseline_first;
    record.baseline = rb->report;
    record.bounded = rs->report;
    record.consistent = rb->action == rs->action && rb->report.tree_digest == rs->report.tree_digest;
    if (!record.consistent) {
      const TreeComparison cmp = compare_trees(*rb->tree, *rs->tree);
      record.divergence = cmp.first_divergence.value_or("r");
    }
    out.baseline_time += rb->report.planning_time_s;
    out.bounded_time += rs->report.planning_time_s;
    out.sessions.push_back(record);
    if (!record.consistent) {
      out.failure = "planners diverged at " + record.divergence + " (row " + row.label() + ", repetition " +
                    std::to_string(repetition) + ", session " + std::to_string(s) + ")";
      break;
    }

    const Action a = rb->action;
    const lightdark::Point mean = belief_mean(belief);
    const double reward = model.state_reward(state, a);
    out.trajectory.push_back({s, state, mean, a, reward});
    if (model.is_terminal_action(a)) break;
    state = model.sample_transition(state, a, world);
    const lightdark::Point z = model.sample_observation(state, world);
    try {
      belief = pf_update(belief, a, z, model, world).posterior;
    } catch (const DegeneratePosteriorError&) {
      break;  // the belief lost track of the true state; end the episode
    }
  }
  return out;
}

inline AlgorithmSummary summarize(const std::string& name, const std::vector<double>& times,
                                  const std::vector<const PlanReport*>& reports, int levels) {
  AlgorithmSummary s;
  s.algorithm = name;
  s.mean_time_s = mean_of(times);
  s.stderr_s = stderr_of(times);
  s.sessions = reports.size();
  s.level_histogram.assign(static_cast<std::size_t>(levels), 0);
  for (const PlanReport* r : reports) {
    s.resimplifications += r->resimplifications;
    s.refinements += r->refinements;
    s.transition_evaluations += r->transition_evaluations;
    for (std::size_t k = 0; k < r->level_histogram.size() && k < s.level_histogram.size(); ++k) {
      s.level_histogram[k] += r->level_histogram[k];
    }
  }
  return s;
}

}  // namespace detail

inline void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TrajectoryStep>& steps) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "step,x1,x2,mean1,mean2,action,reward\n";
  out.precision(17);
  for (const auto& s : steps) {
    out << s.step << ',' << s.state[0] << ',' << s.state[1] << ',' << s.belief_mean[0] << ',' << s.belief_mean[1]
        << ',' << lightdark::kActionNames[s.action] << ',' << s.reward << '\n';
  }
}

/// Runs every (row, repetition) episode, `spec.workers` at a time.
///
/// Throws DivergenceError on the first inconsistent session when `spec.verify` is set.
inline RunReport run_experiment(const ExperimentSpec& spec,
                                const std::function<void(const std::string&)>& progress = {}) {
  spec.validate();
  if (spec.repetitions == 0) return {};
  struct Job {
    std::size_t row;
    std::size_t repetition;
  };
  std::vector<Job> jobs;
  for (std::size_t r = 0; r < spec.rows.size(); ++r) {
    for (std::size_t k = 0; k < spec.repetitions; ++k) jobs.push_back({r, k});
  }
  std::vector<detail::EpisodeResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex log_mutex;
  std::exception_ptr error;

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size() && !stop.load(); i = next++) {
      try {
        results[i] = detail::run_episode(spec, jobs[i].row, jobs[i].repetition, stop);
        if (results[i].failure && spec.verify) stop = true;
        if (progress) {
          std::lock_guard lock(log_mutex);
          progress(spec.rows[jobs[i].row].label() + " repetition " + std::to_string(jobs[i].repetition) +
                   ": baseline " + std::to_string(results[i].baseline_time) + " s, bounded " +
                   std::to_string(results[i].bounded_time) + " s");
        }
      } catch (...) {
        std::lock_guard lock(log_mutex);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };
  const std::size_t n_threads = std::min(spec.workers, jobs.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  for (const auto& r : results) {
    if (r.failure && spec.verify) {
      throw DivergenceError(*r.failure, r.sessions.empty() ? "r" : r.sessions.back().divergence);
    }
  }

  RunReport report;
  report.repetitions = spec.repetitions;
  report.sessions_per_repetition = spec.sessions;
  report.strategy = to_string(spec.strategy);
  for (std::size_t r = 0; r < spec.rows.size(); ++r) {
    std::vector<double> tb;
    std::vector<double> ts;
    std::vector<const PlanReport*> rb;
    std::vector<const PlanReport*> rs;
    bool consistent = true;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (jobs[i].row != r) continue;
      tb.push_back(results[i].baseline_time);
      ts.push_back(results[i].bounded_time);
      for (const auto& s : results[i].sessions) {
        rb.push_back(&s.baseline);
        rs.push_back(&s.bounded);
        consistent = consistent && s.consistent;
      }
    }
    RowSummary row;
    row.row = spec.rows[r];
    row.baseline = detail::summarize("pft-dpw", tb, rb, spec.planner.levels);
    row.bounded = detail::summarize(rs.empty() ? "bounded-pft" : rs.front()->algorithm, ts, rs, spec.planner.levels);
    row.consistent = consistent;
    row.speedup = row.bounded.mean_time_s > 0.0 ? row.baseline.mean_time_s / row.bounded.mean_time_s : 0.0;
    report.rows.push_back(std::move(row));
  }
  for (auto& r : results) {
    for (auto& s : r.sessions) report.sessions.push_back(std::move(s));
  }
  if (!spec.trajectory_dir.empty()) {
    std::filesystem::create_directories(spec.trajectory_dir);
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      const auto& row = spec.rows[jobs[i].row];
      const std::string name = "trajectory_m" + std::to_string(row.m) + "_d" + std::to_string(row.d_max) + "_n" +
                               std::to_string(row.n_iter) + "_rep" + std::to_string(jobs[i].repetition) + ".csv";
      write_trajectory_csv(std::filesystem::path(spec.trajectory_dir) / name, results[i].trajectory);
    }
  }
  return report;
}

// JSON ---------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const ExperimentRow& r) {
  j = nlohmann::json{{"m", r.m}, {"d_max", r.d_max}, {"n_iter", r.n_iter}};
}
inline void from_json(const nlohmann::json& j, ExperimentRow& r) {
  j.at("m").get_to(r.m);
  j.at("d_max").get_to(r.d_max);
  j.at("n_iter").get_to(r.n_iter);
}

inline void to_json(nlohmann::json& j, const SessionRecord& s) {
  j = nlohmann::json{{"row", s.row},
                     {"repetition", s.repetition},
                     {"session", s.session},
                     {"baseline_first", s.baseline_first},
                     {"baseline", s.baseline},
                     {"bounded", s.bounded},
                     {"consistent", s.consistent},
                     {"divergence", s.divergence}};
}
inline void from_json(const nlohmann::json& j, SessionRecord& s) {
  j.at("row").get_to(s.row);
  j.at("repetition").get_to(s.repetition);
  j.at("session").get_to(s.session);
  j.at("baseline_first").get_to(s.baseline_first);
  j.at("baseline").get_to(s.baseline);
  j.at("bounded").get_to(s.bounded);
  j.at("consistent").get_to(s.consistent);
  j.at("divergence").get_to(s.divergence);
}

inline void to_json(nlohmann::json& j, const AlgorithmSummary& a) {
  j = nlohmann::json{{"algorithm", a.algorithm},
                     {"mean_time_s", a.mean_time_s},
                     {"stderr_s", a.stderr_s},
                     {"sessions", a.sessions},
                     {"resimplifications", a.resimplifications},
                     {"refinements", a.refinements},
                     {"level_histogram", a.level_histogram},
                     {"transition_evaluations", a.transition_evaluations}};
}
inline void from_json(const nlohmann::json& j, AlgorithmSummary& a) {
  j.at("algorithm").get_to(a.algorithm);
  j.at("mean_time_s").get_to(a.mean_time_s);
  j.at("stderr_s").get_to(a.stderr_s);
  j.at("sessions").get_to(a.sessions);
  j.at("resimplifications").get_to(a.resimplifications);
  j.at("refinements").get_to(a.refinements);
  j.at("level_histogram").get_to(a.level_histogram);
  j.at("transition_evaluations").get_to(a.transition_evaluations);
}

inline void to_json(nlohmann::json& j, const RowSummary& r) {
  j = nlohmann::json{{"config", r.row},       {"label", r.row.label()},         {"baseline", r.baseline},
                     {"bounded", r.bounded}, {"consistent", r.consistent}, {"speedup", r.speedup}};
}
inline void from_json(const nlohmann::json& j, RowSummary& r) {
  j.at("config").get_to(r.row);
  j.at("baseline").get_to(r.baseline);
  j.at("bounded").get_to(r.bounded);
  j.at("consistent").get_to(r.consistent);
  j.at("speedup").get_to(r.speedup);
}

inline void to_json(nlohmann::json& j, const RunReport& r) {
  j = nlohmann::json{{"rows", r.rows},
                     {"sessions", r.sessions},
                     {"repetitions", r.repetitions},
                     {"sessions_per_repetition", r.sessions_per_repetition},
                     {"strategy", r.strategy}};
}
inline void from_json(const nlohmann::json& j, RunReport& r) {
  j.at("rows").get_to(r.rows);
  j.at("sessions").get_to(r.sessions);
  j.at("repetitions").get_to(r.repetitions);
  j.at("sessions_per_repetition").get_to(r.sessions_per_repetition);
  j.at("strategy").get_to(r.strategy);
}

/// JSON sidecar path next to a CSV output: results.csv -> results.json.
inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  std::filesystem::path p = csv;
  return p.replace_extension(".json");
}

/// Writes the summary CSV and its JSON sidecar.
inline void export_report(const RunReport& report, const std::filesystem::path& csv_path) {
  if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot write " + csv_path.string());
  csv.precision(10);
  csv << "config,algorithm,mean_time_s,stderr_s,consistent,speedup\n";
  for (const auto& r : report.rows) {
    const char* ok = r.consistent ? "true" : "false";
    csv << '"' << r.row.label() << "\"," << r.baseline.algorithm << ',' << r.baseline.mean_time_s << ','
        << r.baseline.stderr_s << ',' << ok << ",1\n";
    csv << '"' << r.row.label() << "\"," << r.bounded.algorithm << ',' << r.bounded.mean_time_s << ','
        << r.bounded.stderr_s << ',' << ok << ',' << r.speedup << '\n';
  }
  if (!csv) throw IoError("failed writing " + csv_path.string());

  const auto json_path = sidecar_path(csv_path);
  std::ofstream js(json_path);
  if (!js) throw IoError("cannot write " + json_path.string());
  js << nlohmann::json(report).dump(2) << '\n';
}

inline RunReport load_report(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw IoError("cannot read " + json_path.string());
  try {
    return nlohmann::json::parse(in).get<RunReport>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed report " + json_path.string() + ": " + e.what());
  }
}

}  // namespace bpft::harness

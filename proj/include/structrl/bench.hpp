#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "structrl/dp_oracle.hpp"
#include "structrl/learners.hpp"
#include "structrl/model_io.hpp"

namespace structrl {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitProperty = 4,
};

/// Birth-death models N x p x r that the structural suite sweeps.
struct ModelGrid {
  std::vector<std::size_t> N = {2, 5, 10, 25};
  std::vector<double> p = {0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<double> r = {0.5, 1.0, 2.0};
  bool include_koole = true;

  std::vector<BirthDeathSpec> birth_death() const;
};

struct ExperimentConfig {
  ModelSpec model = BirthDeathSpec{};

  std::vector<LearnerKind> learners = {LearnerKind::Sal};
  LearnerConfig learner;
  std::vector<std::uint64_t> seeds = {1};
  std::size_t iterations = 10'000;
  double window_mass = 50.0;
  double stop_tolerance = 0.02;
  /// Concurrent (learner, seed) runs; 0 means hardware concurrency.
  std::size_t threads = 1;
  bool write_traces = true;

  SolverOptions solver;

  double sweep_step = 0.05;

  ModelGrid grid;
  std::size_t gradient_points = 25;
  std::uint64_t gradient_seed = 2024;
  double fd_delta = 1e-4;
  double gradient_rel_tol = 1e-4;
  /// Extra value vector pushed through the difference check (negative controls).
  std::optional<std::vector<double>> inject_values;

  void validate() const;
};

/// Parses an INI document with sections [model], [learners], [schedules],
/// [run], [solver], [sweep] and [check]. Unknown keys are errors.
ExperimentConfig parse_config(const boost::property_tree::ptree& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
boost::property_tree::ptree to_ptree(const ExperimentConfig& config);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);

struct CommandResult {
  int exit_code = kExitOk;
  std::string report;
};

CommandResult cmd_solve(const ExperimentConfig& config, const std::filesystem::path& out);
CommandResult cmd_sweep(const ExperimentConfig& config, const std::filesystem::path& out);
CommandResult cmd_bench(const ExperimentConfig& config, const std::filesystem::path& out);
CommandResult cmd_check(const ExperimentConfig& config, const std::filesystem::path& out);

struct PropertyRecord {
  std::string name;
  bool ok = true;
  std::size_t cases = 0;
  /// Largest violation amount over all cases; <= 0 when every case holds.
  double worst_slack = 0.0;
  std::string detail;
};

/// Every structural check over the grid, the queue instance and the config's model.
std::vector<PropertyRecord> run_structural_suite(const ExperimentConfig& config);

/// Actions compared on the states a policy visits: 0..T* for threshold T*.
bool policy_matches_on_recurrent(std::span<const Action> learned, std::span<const Action> optimal);

struct BenchRun {
  LearnerKind kind = LearnerKind::Sal;
  std::uint64_t seed = 0;
  /// Settled reading; the acceptance statistic.
  StoppingResult stopping;
  StoppingResult first_window;
  bool failed = false;
  std::string failure;
  bool policy_match = false;
  double final_threshold = 0.0;
  std::size_t storage = 0;
  double mean_ops = 0.0;
  double final_sigma = 0.0;
};

struct BenchSummaryRow {
  LearnerKind kind = LearnerKind::Sal;
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::size_t stopped = 0;
  double median_stop = 0.0;
  double median_first_window = 0.0;
  std::size_t policy_matches = 0;
  std::size_t storage = 0;
  double mean_ops = 0.0;
};

struct BenchOutcome {
  std::vector<BenchRun> runs;
  std::vector<BenchSummaryRow> summary;
  /// Settled medians non-decreasing along SAL, PDS, Q-learning among the learners run.
  bool ordering_holds = true;
  std::vector<Action> optimal;
};

/// Runs every (learner, seed) pair; writes traces when out is given.
BenchOutcome run_bench(const ExperimentConfig& config, const std::optional<std::filesystem::path>& out);

double median(std::vector<double> xs);

}  // namespace structrl

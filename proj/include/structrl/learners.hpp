#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "structrl/environments.hpp"
#include "structrl/mdp.hpp"
#include "structrl/schedules.hpp"
#include "structrl/threshold.hpp"

namespace structrl {

enum class LearnerKind { Sal, QLearning, Pds };

std::string_view to_string(LearnerKind kind);
LearnerKind parse_learner(std::string_view name);

/// What the threshold update multiplies by (-1)^gamma.
enum class DualTarget {
  /// V(k) alone.
  ValueOnly,
  /// r(i, a_gamma) + V(k): the sampled action value, needed when rewards depend on the action.
  ActionValue,
};

std::string_view to_string(DualTarget target);
DualTarget parse_dual_target(std::string_view name);

struct LearnerConfig {
  SchedulePair schedules = default_schedules();
  MixerKind mixer = MixerKind::Sigmoid;
  DualTarget dual_target = DualTarget::ActionValue;
  std::size_t ref_state = 0;
  /// Q-learning exploration eps(n) = min(1, exploration_scale / n).
  double exploration_scale = 50.0;
  /// Observed-reward window behind the sigma_empirical column.
  std::size_t empirical_window = 100;
};

/// Value-table reads and writes.
struct OpCounter {
  std::uint64_t total = 0;
  std::uint64_t last_iteration = 0;

  void begin() { last_iteration = 0; }
  void touch(std::uint64_t k = 1) {
    total += k;
    last_iteration += k;
  }
};

/// Mutable state of one learner run. Single owner.
struct LearnerState {
  LearnerKind kind = LearnerKind::Sal;
  LearnerConfig config;
  /// SAL: V(i). PDS: post-decision values. Unused by Q-learning.
  Vector values;
  /// Q-learning only: n_states x 2.
  Matrix q;
  /// SAL only, kept in [0, N].
  double threshold = 0.0;
  /// eta(i, n) per state (SAL, PDS) or per state-action pair, index 2i + a (Q-learning).
  /// SAL and Q-learning step with g(eta); PDS counts visits but steps with g(n).
  std::vector<std::size_t> local_clocks;
  std::size_t global_clock = 0;
  std::size_t current_state = 0;
  Rng rng;
  OpCounter ops;
  double last_reward = 0.0;

  LearnerState(LearnerKind k, const LearnerConfig& cfg, std::size_t n_states, std::uint64_t seed);

  /// Entries a learner must store: |S| + 1 (SAL), |S| x |A| (Q), |S| (PDS).
  std::size_t storage_size() const;
  bool finite() const;
};

/// T clamped to [0, upper] after T + step * mix_grad * (-1)^gamma * target.
double dual_threshold_update(double T, double step, double mix_grad, bool gamma, double target, double upper);

void sal_step(LearnerState& state, SamplingEnv& env);
void q_learning_step(LearnerState& state, SamplingEnv& env);
/// Requires an environment with an exogenous-event decomposition.
void pds_learning_step(LearnerState& state, SamplingEnv& env);
void learner_step(LearnerState& state, SamplingEnv& env);

/// Deterministic greedy action per state (ties to A2). SAL reports the
/// deterministic threshold round(T).
std::vector<Action> greedy_policy(const LearnerState& state, const SamplingEnv& env);
/// The policy the learner currently follows, as an exact-evaluable policy.
StationaryPolicy current_policy(const LearnerState& state, const SamplingEnv& env);

/// A model plus what the PDS learner needs from it.
struct EnvSpec {
  std::shared_ptr<const MdpModel> model;
  std::optional<EventDecomposition> events;
};

struct TraceRow {
  std::size_t n = 0;
  double cum_step = 0.0;
  double sigma_exact = 0.0;
  double sigma_empirical = 0.0;
  double threshold = 0.0;
  std::uint64_t ops = 0;
};

struct RunTrace {
  LearnerKind kind = LearnerKind::Sal;
  std::uint64_t seed = 0;
  std::vector<TraceRow> rows;
  bool failed = false;
  std::string failure;
  std::vector<Action> final_greedy;
  double final_threshold = 0.0;
  std::size_t storage = 0;
};

/// Runs iters steps from state 0. The env stream and the learner's auxiliary
/// stream are both derived from seed. Each row records the exact average reward
/// of the policy in force after that iteration.
RunTrace run_learner(LearnerKind kind, const EnvSpec& env, const LearnerConfig& config, std::uint64_t seed,
                     std::size_t iters);

/// Exact sigma of stationary policies, memoized for deterministic ones.
class PolicyEvaluator {
 public:
  explicit PolicyEvaluator(std::shared_ptr<const MdpModel> model) : model_(std::move(model)) {}
  double sigma(const StationaryPolicy& policy);

 private:
  std::shared_ptr<const MdpModel> model_;
  std::map<std::vector<std::uint8_t>, double> cache_;
};

struct StoppingResult {
  bool stopped = false;
  /// Iteration at which the window rule first holds, or the trace length.
  std::size_t iteration = 0;
  double sigma_at_stop = 0.0;
};

/**
 * Window stopping rule. The window at row n is stable when every row m with
 * cum_step(m) - cum_step(n) <= window_mass stays within tolerance * |sigma(n)|
 * of sigma(n); windows that run past the end of the trace are not judged.
 */
enum class StopRule {
  /// Stop at the first stable window.
  FirstWindow,
  /// Stop where the final unbroken run of stable windows begins, so that a flat
  /// stretch before learning has started does not count as convergence.
  Settled,
};

std::string_view to_string(StopRule rule);

/// Per row: 1 stable, 0 unstable, -1 window not fully observed.
std::vector<int> stable_windows(const RunTrace& trace, double window_mass, double tolerance);

StoppingResult iterations_to_stopping(const RunTrace& trace, double window_mass, double tolerance,
                                      StopRule rule = StopRule::Settled);

}  // namespace structrl

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace structrl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// The two controls of every model. A1 holds/rejects and A2 advances/admits.
enum class Action : std::uint8_t { A1 = 0, A2 = 1 };

inline constexpr std::size_t kNumActions = 2;
inline constexpr std::array<Action, kNumActions> kActions = {Action::A1, Action::A2};

constexpr std::size_t index_of(Action a) { return static_cast<std::size_t>(a); }
std::string_view to_string(Action a);

/// Raised when a linear solve or an iterative solver does not meet its contract.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/**
 * Finite two-action MDP on states 0..n_states-1.
 *
 * Rows of infeasible (state, action) pairs are stored as zeros and never read
 * by the solvers. Immutable after construction.
 */
class MdpModel {
 public:
  /// kernel[a] is an n x n row-stochastic matrix on feasible rows; reward is n x 2.
  MdpModel(std::array<Matrix, kNumActions> kernel, Matrix reward,
           std::vector<std::array<bool, kNumActions>> feasible);

  std::size_t n_states() const { return static_cast<std::size_t>(reward_.rows()); }
  std::size_t last_state() const { return n_states() - 1; }

  const Matrix& kernel(Action a) const { return kernel_[index_of(a)]; }
  auto kernel_row(std::size_t i, Action a) const { return kernel_[index_of(a)].row(static_cast<Eigen::Index>(i)); }
  double reward(std::size_t i, Action a) const {
    return reward_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(index_of(a)));
  }
  const Matrix& reward_table() const { return reward_; }
  bool feasible(std::size_t i, Action a) const { return feasible_[i][index_of(a)]; }
  std::vector<Action> feasible_actions(std::size_t i) const;

  double min_reward() const;
  double max_reward() const;

 private:
  std::array<Matrix, kNumActions> kernel_;
  Matrix reward_;
  std::vector<std::array<bool, kNumActions>> feasible_;
};

/// Randomized memoryless policy: rule(i, a) is the probability of action a in state i.
class StationaryPolicy {
 public:
  explicit StationaryPolicy(Matrix rule);

  static StationaryPolicy deterministic(std::span<const Action> actions);
  /// A2 on states i < threshold (when feasible), A1 elsewhere.
  static StationaryPolicy threshold(const MdpModel& model, std::size_t threshold);

  std::size_t n_states() const { return static_cast<std::size_t>(rule_.rows()); }
  double prob(std::size_t i, Action a) const {
    return rule_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(index_of(a)));
  }
  const Matrix& rule() const { return rule_; }

  /// Throws if the policy puts mass on an action the model forbids.
  void validate_against(const MdpModel& model) const;

 private:
  Matrix rule_;
};

struct Distribution {
  Vector probs;
};

/// Birth-death chain: A1 stays w.p. p (reward 0), A2 moves up w.p. p (reward r);
/// both move to (i-1)+ otherwise. A2 is infeasible in state N.
MdpModel build_birth_death_model(std::size_t N, double p, double r);

Matrix policy_kernel(const MdpModel& model, const StationaryPolicy& policy);
Vector policy_reward(const MdpModel& model, const StationaryPolicy& policy);

/// Solves pi P = pi, sum(pi) = 1 by a dense LU on the balance equations with one
/// equation replaced by normalization. Falls back to power iteration; throws
/// SolverError if the residual stays above 1e-8.
Distribution stationary_distribution(const Matrix& kernel);

double exact_average_reward(const MdpModel& model, const StationaryPolicy& policy);

/// Number of leading states that choose A2 before the first A1.
std::size_t switch_point(std::span<const Action> actions);
/// Count of A1 -> A2 or A2 -> A1 changes when scanning states upward.
std::size_t count_switches(std::span<const Action> actions);
/// True iff the actions are A2 on a prefix and A1 on the rest.
bool is_threshold_shape(std::span<const Action> actions);

}  // namespace structrl

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "structrl/mdp.hpp"
#include "structrl/threshold.hpp"

namespace structrl {

/// Relative values V(i) with V(ref_state) = 0 and the average reward sigma.
struct ValueTable {
  Vector values;
  double sigma = 0.0;
  std::size_t ref_state = 0;
};

/// Every VIA sweep v_0 = 0, v_1, ..., v_n.
struct ViaTrace {
  std::vector<Vector> iterates;
};

struct SolverReport {
  std::string solver;
  std::size_t iterations = 0;
  double final_span = 0.0;
  double sigma = 0.0;
  bool converged = false;
};

struct SolverOptions {
  std::size_t max_iters = 1'000'000;
  double tol = 1e-10;
  std::size_t ref_state = 0;
  /// When false value_iteration keeps only the first and last iterates.
  bool keep_trace = true;
  /// Action values closer than this count as tied when extracting the greedy
  /// policy. Converged values are only accurate to about the stopping tolerance,
  /// so smaller gaps carry no information.
  double tie_tol = 1e-8;
};

struct ViaResult {
  ViaTrace trace;
  std::vector<Action> greedy;
  /// v_{n+1}(ref) - v_n(ref) on the last sweep.
  double gain = 0.0;
  SolverReport report;
};

struct RviaResult {
  ValueTable table;
  std::vector<Action> greedy;
  SolverReport report;
};

/// Greedy action per state for values v: argmax_a r(i,a) + sum_j p_ij(a) v(j).
/// A2 wins whenever it is within tie_tol of A1.
std::vector<Action> greedy_actions(const MdpModel& model, const Vector& v, double tie_tol = 0.0);

/// Undiscounted value iteration from v_0 = 0. Stops when span(v_{n+1} - v_n) < tol.
/// Throws SolverError carrying the last span when max_iters is exhausted.
ViaResult value_iteration(const MdpModel& model, const SolverOptions& opts = {});

/// Relative value iteration normalized at opts.ref_state; sigma is the converged offset.
RviaResult rvia(const MdpModel& model, const SolverOptions& opts = {});

struct ThresholdEvaluation {
  ValueTable table;
  Distribution stationary;
  double sigma = 0.0;
  /// sup-norm residual of V = r_T - sigma + P(T) V.
  double poisson_residual = 0.0;
};

/// Exact pi(., T), sigma(T) and V(., T) for the randomized threshold policy.
ThresholdEvaluation evaluate_threshold(const MdpModel& model, double T, MixerKind mixer,
                                       std::size_t ref_state = 0);

/**
 * d sigma / dT for the randomized threshold policy:
 *   sum_i pi(i,T) [ dr_T(i)/dT + sum_j dP_ij(T)/dT V(j,T) ].
 *
 * The reward term vanishes when both actions pay the same reward.
 */
double exact_sigma_gradient(const MdpModel& model, double T, MixerKind mixer,
                            OneSided side = OneSided::None);

struct OptimalThreshold {
  std::size_t threshold = 0;
  double sigma = 0.0;
  /// sigma of every deterministic threshold 0..N, in double.
  std::vector<double> sweep;
};

/// Exhaustive search over deterministic thresholds T in {0..N} ("A2 on i < T").
/// Comparisons run in quad precision on GTH stationary vectors so that gaps far
/// below double epsilon are still ordered; exact ties go to the smaller T.
OptimalThreshold brute_force_optimal_threshold(const MdpModel& model);

/// Exact sigma at every integer threshold, double precision.
std::vector<double> integer_threshold_sweep(const MdpModel& model);

/// Structured key = value text for a solver report.
std::string format_report(const SolverReport& report);

}  // namespace structrl

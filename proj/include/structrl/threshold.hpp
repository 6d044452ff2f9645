#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "structrl/mdp.hpp"

namespace structrl {

struct ViaTrace;

enum class MixerKind { Sigmoid, PiecewiseLinear };

std::string_view to_string(MixerKind kind);
MixerKind parse_mixer(std::string_view name);

/// Logistic weight e^(i-T-0.5) / (1 + e^(i-T-0.5)).
double sigmoid_mix(double i, double T);
/// d/dT of sigmoid_mix, equal to -f (1 - f).
double grad_sigmoid_wrt_T(double i, double T);
/// 0 for i <= T, 1 for i >= T + 1, i - T in between.
double piecewise_linear_mix(double i, double T);

enum class OneSided { None, Left, Right };

/**
 * Threshold parameter T in [0, N] plus the mixer that smooths it.
 *
 * The mixer weight is the probability of following the A1 rule. It is
 * evaluated at (i, T - 1) so that an integer T reproduces the deterministic
 * policy "A2 on states i < T": the piecewise-linear weight is exactly 0/1 there,
 * and the sigmoid is centred halfway between states T - 1 and T.
 */
class ThresholdPolicy {
 public:
  ThresholdPolicy(double T, MixerKind mixer, std::size_t N);

  double T() const { return T_; }
  MixerKind mixer() const { return mixer_; }
  std::size_t upper() const { return N_; }

  /// Probability of the A1 rule in state i.
  double a1_weight(std::size_t i) const;
  /// d a1_weight / dT. Piecewise-linear kinks need an explicit side.
  double a1_weight_grad(std::size_t i, OneSided side = OneSided::None) const;
  bool differentiable_at(std::size_t i) const;

  StationaryPolicy as_stationary(const MdpModel& model) const;

 private:
  double T_;
  MixerKind mixer_;
  std::size_t N_;
};

/// The A1 rule P^0 and the A2 rule P^1, with the per-state rewards each earns.
/// Where A2 is infeasible its rule falls back to A1.
struct MixedKernelRules {
  Matrix above_rule;   // P^0, used with weight f
  Matrix below_rule;   // P^1, used with weight 1 - f
  Vector above_reward;
  Vector below_reward;

  std::size_t n_states() const { return static_cast<std::size_t>(above_rule.rows()); }
  void validate() const;
};

MixedKernelRules threshold_rules(const MdpModel& model);

Matrix randomized_kernel(const MixedKernelRules& rules, const ThresholdPolicy& policy);
Vector randomized_reward(const MixedKernelRules& rules, const ThresholdPolicy& policy);
/// Entrywise (P^0 - P^1) * d f / dT. Rows sum to zero.
Matrix kernel_gradient(const MixedKernelRules& rules, const ThresholdPolicy& policy,
                       OneSided side = OneSided::None);
Vector reward_gradient(const MixedKernelRules& rules, const ThresholdPolicy& policy,
                       OneSided side = OneSided::None);

struct CheckResult {
  bool ok = true;
  /// First offending index (state, or peak index for unimodality).
  std::optional<std::size_t> index;
  /// Iteration of the first violation for cross-iteration checks.
  std::optional<std::size_t> iteration;
  /// Largest observed violation amount; <= 0 when the property holds strictly.
  double worst_slack = 0.0;
};

inline constexpr double kDifferenceSlack = 1e-9;
inline constexpr double kUnimodalSlack = 1e-10;

/// V(i+1) - V(i) non-increasing in i.
CheckResult check_nonincreasing_differences(std::span<const double> values,
                                            double slack = kDifferenceSlack);
/// v_n(i+1) - v_n(i) non-increasing in n for every i.
CheckResult check_monotone_across_iterations(const ViaTrace& trace, double slack = kDifferenceSlack);
/// Weakly up to a peak then weakly down. On success index holds the first peak.
CheckResult check_unimodal(std::span<const double> sequence, double slack = kUnimodalSlack);

}  // namespace structrl

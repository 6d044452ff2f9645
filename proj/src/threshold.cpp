#include "structrl/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "structrl/dp_oracle.hpp"

namespace structrl {

std::string_view to_string(MixerKind kind) {
  return kind == MixerKind::Sigmoid ? "sigmoid" : "piecewise_linear";
}

MixerKind parse_mixer(std::string_view name) {
  if (name == "sigmoid") return MixerKind::Sigmoid;
  if (name == "piecewise_linear" || name == "linear") return MixerKind::PiecewiseLinear;
  throw std::invalid_argument("unknown mixer '" + std::string(name) + "'");
}

double sigmoid_mix(double i, double T) {
  const double x = i - T - 0.5;
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double grad_sigmoid_wrt_T(double i, double T) {
  // -f (1 - f) written in e^-|x| so the tails do not cancel to zero.
  const double e = std::exp(-std::abs(i - T - 0.5));
  return -e / ((1.0 + e) * (1.0 + e));
}

double piecewise_linear_mix(double i, double T) {
  if (i <= T) return 0.0;
  if (i >= T + 1.0) return 1.0;
  return i - T;
}

ThresholdPolicy::ThresholdPolicy(double T, MixerKind mixer, std::size_t N) : T_(T), mixer_(mixer), N_(N) {
  if (!(T >= 0.0 && T <= static_cast<double>(N)))
    throw std::invalid_argument("threshold " + std::to_string(T) + " outside [0, " + std::to_string(N) + "]");
}

double ThresholdPolicy::a1_weight(std::size_t i) const {
  const double x = static_cast<double>(i);
  return mixer_ == MixerKind::Sigmoid ? sigmoid_mix(x, T_ - 1.0) : piecewise_linear_mix(x, T_ - 1.0);
}

bool ThresholdPolicy::differentiable_at(std::size_t i) const {
  if (mixer_ == MixerKind::Sigmoid) return true;
  const double x = static_cast<double>(i);
  return x != T_ - 1.0 && x != T_;
}

double ThresholdPolicy::a1_weight_grad(std::size_t i, OneSided side) const {
  const double x = static_cast<double>(i);
  if (mixer_ == MixerKind::Sigmoid) return grad_sigmoid_wrt_T(x, T_ - 1.0);
  // Weight is 1 - (T - x) on x in (T - 1, T); slope -1 there, 0 outside.
  if (x > T_ - 1.0 && x < T_) return -1.0;
  if (x != T_ - 1.0 && x != T_) return 0.0;
  switch (side) {
    case OneSided::Right:  // T + eps: the open window covers (T - 1, T].
      return x == T_ ? -1.0 : 0.0;
    case OneSided::Left:  // T - eps: the open window covers [T - 1, T).
      return x == T_ - 1.0 ? -1.0 : 0.0;
    case OneSided::None:
      break;
  }
  throw std::domain_error("piecewise-linear mixer is not differentiable at T=" + std::to_string(T_) +
                          " for state " + std::to_string(i) + "; pass a one-sided flag");
}

StationaryPolicy ThresholdPolicy::as_stationary(const MdpModel& model) const {
  const auto n = static_cast<Eigen::Index>(model.n_states());
  Matrix rule(n, kNumActions);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto s = static_cast<std::size_t>(i);
    const double w = model.feasible(s, Action::A2) ? a1_weight(s) : 1.0;
    rule(i, 0) = w;
    rule(i, 1) = 1.0 - w;
  }
  return StationaryPolicy(std::move(rule));
}

void MixedKernelRules::validate() const {
  const auto n = above_rule.rows();
  if (above_rule.cols() != n || below_rule.rows() != n || below_rule.cols() != n ||
      above_reward.size() != n || below_reward.size() != n)
    throw std::invalid_argument("mixed kernel rules have inconsistent dimensions");
}

MixedKernelRules threshold_rules(const MdpModel& model) {
  const auto n = static_cast<Eigen::Index>(model.n_states());
  MixedKernelRules rules{Matrix(n, n), Matrix(n, n), Vector(n), Vector(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto s = static_cast<std::size_t>(i);
    const Action hold = model.feasible(s, Action::A1) ? Action::A1 : Action::A2;
    const Action advance = model.feasible(s, Action::A2) ? Action::A2 : Action::A1;
    rules.above_rule.row(i) = model.kernel(hold).row(i);
    rules.below_rule.row(i) = model.kernel(advance).row(i);
    rules.above_reward(i) = model.reward(s, hold);
    rules.below_reward(i) = model.reward(s, advance);
  }
  return rules;
}

namespace {

void check_dims(const MixedKernelRules& rules, const ThresholdPolicy& policy) {
  rules.validate();
  if (rules.n_states() != policy.upper() + 1)
    throw std::invalid_argument("threshold policy range does not match the rules' state space");
}

}  // namespace

Matrix randomized_kernel(const MixedKernelRules& rules, const ThresholdPolicy& policy) {
  check_dims(rules, policy);
  Matrix out(rules.above_rule.rows(), rules.above_rule.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double f = policy.a1_weight(static_cast<std::size_t>(i));
    out.row(i) = f * rules.above_rule.row(i) + (1.0 - f) * rules.below_rule.row(i);
  }
  return out;
}

Vector randomized_reward(const MixedKernelRules& rules, const ThresholdPolicy& policy) {
  check_dims(rules, policy);
  Vector out(rules.above_reward.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double f = policy.a1_weight(static_cast<std::size_t>(i));
    out(i) = f * rules.above_reward(i) + (1.0 - f) * rules.below_reward(i);
  }
  return out;
}

Matrix kernel_gradient(const MixedKernelRules& rules, const ThresholdPolicy& policy, OneSided side) {
  check_dims(rules, policy);
  Matrix out(rules.above_rule.rows(), rules.above_rule.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double df = policy.a1_weight_grad(static_cast<std::size_t>(i), side);
    out.row(i) = (rules.above_rule.row(i) - rules.below_rule.row(i)) * df;
  }
  return out;
}

Vector reward_gradient(const MixedKernelRules& rules, const ThresholdPolicy& policy, OneSided side) {
  check_dims(rules, policy);
  Vector out(rules.above_reward.size());
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out(i) = (rules.above_reward(i) - rules.below_reward(i)) *
             policy.a1_weight_grad(static_cast<std::size_t>(i), side);
  return out;
}

CheckResult check_nonincreasing_differences(std::span<const double> values, double slack) {
  CheckResult res;
  res.worst_slack = -std::numeric_limits<double>::infinity();
  if (values.size() < 3) {
    res.worst_slack = 0.0;
    return res;
  }
  for (std::size_t i = 0; i + 2 < values.size(); ++i) {
    const double d0 = values[i + 1] - values[i];
    const double d1 = values[i + 2] - values[i + 1];
    const double excess = d1 - d0;
    res.worst_slack = std::max(res.worst_slack, excess);
    if (excess > slack && res.ok) {
      res.ok = false;
      res.index = i;
    }
  }
  return res;
}

CheckResult check_monotone_across_iterations(const ViaTrace& trace, double slack) {
  CheckResult res;
  res.worst_slack = -std::numeric_limits<double>::infinity();
  const auto& it = trace.iterates;
  for (std::size_t n = 0; n + 1 < it.size(); ++n) {
    const Vector& a = it[n];
    const Vector& b = it[n + 1];
    for (Eigen::Index i = 0; i + 1 < a.size(); ++i) {
      const double excess = (b(i + 1) - b(i)) - (a(i + 1) - a(i));
      res.worst_slack = std::max(res.worst_slack, excess);
      if (excess > slack && res.ok) {
        res.ok = false;
        res.iteration = n;
        res.index = static_cast<std::size_t>(i);
      }
    }
  }
  if (it.size() < 2) res.worst_slack = 0.0;
  return res;
}

CheckResult check_unimodal(std::span<const double> sequence, double slack) {
  CheckResult res;
  if (sequence.empty()) throw std::invalid_argument("check_unimodal needs a nonempty sequence");
  const auto peak = static_cast<std::size_t>(std::max_element(sequence.begin(), sequence.end()) - sequence.begin());
  res.index = peak;
  res.worst_slack = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < sequence.size(); ++k) {
    // Before the peak a drop is a violation, after it a rise is.
    const double step = sequence[k + 1] - sequence[k];
    const double excess = k < peak ? -step : step;
    res.worst_slack = std::max(res.worst_slack, excess);
    if (excess > slack) res.ok = false;
  }
  if (sequence.size() == 1) res.worst_slack = 0.0;
  return res;
}

}  // namespace structrl

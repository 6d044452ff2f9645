#include "structrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace structrl {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kResidualLimit = 1e-8;

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double residual_inf(const Matrix& kernel, const Vector& pi) {
  Vector r = kernel.transpose() * pi - pi;
  return r.cwiseAbs().maxCoeff();
}

}  // namespace

std::string_view to_string(Action a) { return a == Action::A1 ? "A1" : "A2"; }

MdpModel::MdpModel(std::array<Matrix, kNumActions> kernel, Matrix reward,
                   std::vector<std::array<bool, kNumActions>> feasible)
    : kernel_(std::move(kernel)), reward_(std::move(reward)), feasible_(std::move(feasible)) {
  const auto n = reward_.rows();
  require(n >= 1, "model needs at least one state");
  require(reward_.cols() == static_cast<Eigen::Index>(kNumActions), "reward table must have two columns");
  require(feasible_.size() == static_cast<std::size_t>(n), "feasibility table size mismatch");
  for (const auto& k : kernel_) require(k.rows() == n && k.cols() == n, "kernel must be n x n");

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& feas = feasible_[static_cast<std::size_t>(i)];
    require(feas[0] || feas[1], "state " + std::to_string(i) + " has no feasible action");
    for (std::size_t a = 0; a < kNumActions; ++a) {
      auto row = kernel_[a].row(i);
      if (!feas[a]) {
        require(row.isZero(0.0), "infeasible action rows must be zero");
        continue;
      }
      require(row.minCoeff() >= 0.0 && row.maxCoeff() <= 1.0, "kernel entries must lie in [0,1]");
      require(std::abs(row.sum() - 1.0) <= kRowSumTol,
              "kernel row (" + std::to_string(i) + "," + std::to_string(a) + ") does not sum to 1");
      require(std::isfinite(reward_(i, static_cast<Eigen::Index>(a))), "rewards must be finite");
    }
  }
}

std::vector<Action> MdpModel::feasible_actions(std::size_t i) const {
  std::vector<Action> out;
  for (Action a : kActions)
    if (feasible(i, a)) out.push_back(a);
  return out;
}

double MdpModel::min_reward() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_states(); ++i)
    for (Action a : kActions)
      if (feasible(i, a)) m = std::min(m, reward(i, a));
  return m;
}

double MdpModel::max_reward() const {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_states(); ++i)
    for (Action a : kActions)
      if (feasible(i, a)) m = std::max(m, reward(i, a));
  return m;
}

StationaryPolicy::StationaryPolicy(Matrix rule) : rule_(std::move(rule)) {
  require(rule_.cols() == static_cast<Eigen::Index>(kNumActions), "policy must have two action columns");
  for (Eigen::Index i = 0; i < rule_.rows(); ++i) {
    require(rule_.row(i).minCoeff() >= 0.0, "policy probabilities must be nonnegative");
    require(std::abs(rule_.row(i).sum() - 1.0) <= kRowSumTol, "policy rows must sum to 1");
  }
}

StationaryPolicy StationaryPolicy::deterministic(std::span<const Action> actions) {
  Matrix rule = Matrix::Zero(static_cast<Eigen::Index>(actions.size()), kNumActions);
  for (std::size_t i = 0; i < actions.size(); ++i)
    rule(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(index_of(actions[i]))) = 1.0;
  return StationaryPolicy(std::move(rule));
}

StationaryPolicy StationaryPolicy::threshold(const MdpModel& model, std::size_t threshold) {
  std::vector<Action> actions(model.n_states(), Action::A1);
  for (std::size_t i = 0; i < model.n_states(); ++i)
    if (i < threshold && model.feasible(i, Action::A2)) actions[i] = Action::A2;
  return deterministic(actions);
}

void StationaryPolicy::validate_against(const MdpModel& model) const {
  if (n_states() != model.n_states()) throw std::invalid_argument("policy/model state count mismatch");
  for (std::size_t i = 0; i < n_states(); ++i)
    for (Action a : kActions)
      if (!model.feasible(i, a) && prob(i, a) > 0.0)
        throw std::invalid_argument("policy puts mass on infeasible action " + std::string(to_string(a)) +
                                    " in state " + std::to_string(i));
}

MdpModel build_birth_death_model(std::size_t N, double p, double r) {
  require(N >= 1, "N must be at least 1");
  require(p > 0.0 && p < 1.0, "p must lie in (0,1)");
  require(r >= 0.0 && std::isfinite(r), "r must be a nonnegative real");

  const auto n = static_cast<Eigen::Index>(N + 1);
  std::array<Matrix, kNumActions> kernel = {Matrix::Zero(n, n), Matrix::Zero(n, n)};
  Matrix reward = Matrix::Zero(n, kNumActions);
  std::vector<std::array<bool, kNumActions>> feasible(N + 1, {true, true});

  auto& hold = kernel[index_of(Action::A1)];
  auto& advance = kernel[index_of(Action::A2)];
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index down = std::max<Eigen::Index>(i - 1, 0);
    hold(i, i) += p;
    hold(i, down) += 1.0 - p;
    if (i + 1 < n) {
      advance(i, i + 1) += p;
      advance(i, down) += 1.0 - p;
      reward(i, 1) = r;
    } else {
      feasible[static_cast<std::size_t>(i)][index_of(Action::A2)] = false;
    }
  }
  return MdpModel(std::move(kernel), std::move(reward), std::move(feasible));
}

Matrix policy_kernel(const MdpModel& model, const StationaryPolicy& policy) {
  policy.validate_against(model);
  const auto n = static_cast<Eigen::Index>(model.n_states());
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Action a : kActions) {
      const double w = policy.prob(static_cast<std::size_t>(i), a);
      if (w > 0.0) out.row(i) += w * model.kernel(a).row(i);
    }
  return out;
}

Vector policy_reward(const MdpModel& model, const StationaryPolicy& policy) {
  policy.validate_against(model);
  Vector out = Vector::Zero(static_cast<Eigen::Index>(model.n_states()));
  for (std::size_t i = 0; i < model.n_states(); ++i)
    for (Action a : kActions) {
      const double w = policy.prob(i, a);
      if (w > 0.0) out(static_cast<Eigen::Index>(i)) += w * model.reward(i, a);
    }
  return out;
}

Distribution stationary_distribution(const Matrix& kernel) {
  const auto n = kernel.rows();
  if (kernel.cols() != n || n == 0) throw std::invalid_argument("kernel must be a nonempty square matrix");

  // (P^T - I) pi = 0 with the last balance equation swapped for sum(pi) = 1.
  Matrix a = kernel.transpose() - Matrix::Identity(n, n);
  a.row(n - 1).setOnes();
  Vector b = Vector::Zero(n);
  b(n - 1) = 1.0;
  Vector pi = a.partialPivLu().solve(b);

  auto clean = [](Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (v(i) < 0.0) v(i) = 0.0;
    const double s = v.sum();
    if (s > 0.0) v /= s;
  };

  if (pi.allFinite()) {
    clean(pi);
    if (residual_inf(kernel, pi) <= 1e-10) return {pi};
  }

  // Power iteration on the lazy chain (I + P)/2 removes periodicity.
  Vector x = Vector::Constant(n, 1.0 / static_cast<double>(n));
  Matrix lazy_t = 0.5 * (kernel.transpose() + Matrix::Identity(n, n));
  for (int it = 0; it < 200000; ++it) {
    Vector next = lazy_t * x;
    const double delta = (next - x).cwiseAbs().maxCoeff();
    x = std::move(next);
    if (delta < 1e-15) break;
  }
  clean(x);
  if (x.sum() <= 0.0) throw SolverError("stationary iteration lost all probability mass (not a stochastic kernel?)", 1.0);
  const double res = residual_inf(kernel, x);
  if (res > kResidualLimit) {
    std::ostringstream msg;
    msg << "stationary distribution residual " << res << " exceeds " << kResidualLimit
        << " (reducible or periodic chain?)";
    throw SolverError(msg.str(), res);
  }
  return {x};
}

double exact_average_reward(const MdpModel& model, const StationaryPolicy& policy) {
  const Distribution d = stationary_distribution(policy_kernel(model, policy));
  return d.probs.dot(policy_reward(model, policy));
}

std::size_t switch_point(std::span<const Action> actions) {
  std::size_t k = 0;
  while (k < actions.size() && actions[k] == Action::A2) ++k;
  return k;
}

std::size_t count_switches(std::span<const Action> actions) {
  std::size_t c = 0;
  for (std::size_t i = 1; i < actions.size(); ++i)
    if (actions[i] != actions[i - 1]) ++c;
  return c;
}

bool is_threshold_shape(std::span<const Action> actions) {
  const std::size_t k = switch_point(actions);
  return std::all_of(actions.begin() + static_cast<std::ptrdiff_t>(k), actions.end(),
                     [](Action a) { return a == Action::A1; });
}

}  // namespace structrl

#include "structrl/dp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace structrl {

namespace {

using Quad = __float128;

double span(const Vector& v) { return v.maxCoeff() - v.minCoeff(); }

/// One Bellman sweep: out(i) = max over feasible a of r(i,a) + P_a(i,.) v.
void bellman(const MdpModel& model, const Vector& v, Vector& out, std::vector<Action>* greedy, double tie_tol = 0.0) {
  const Vector q1 = model.reward_table().col(0) + model.kernel(Action::A1) * v;
  const Vector q2 = model.reward_table().col(1) + model.kernel(Action::A2) * v;
  out.resize(v.size());
  if (greedy) greedy->assign(static_cast<std::size_t>(v.size()), Action::A1);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto s = static_cast<std::size_t>(i);
    const bool f1 = model.feasible(s, Action::A1);
    const bool f2 = model.feasible(s, Action::A2);
    const bool pick2 = f2 && (!f1 || q2(i) >= q1(i));
    out(i) = pick2 ? q2(i) : q1(i);
    if (greedy && f2 && (!f1 || q2(i) >= q1(i) - tie_tol)) (*greedy)[s] = Action::A2;
  }
}

void check_ref(const MdpModel& model, std::size_t ref) {
  if (ref >= model.n_states()) throw std::invalid_argument("reference state out of range");
}

[[noreturn]] void fail_nonconvergence(const char* solver, std::size_t iters, double last_span) {
  std::ostringstream msg;
  msg << solver << " did not converge in " << iters << " iterations (last span " << last_span << ")";
  throw SolverError(msg.str(), last_span);
}

/// Grassmann-Taksar-Heyman state reduction. Subtraction-free, so every entry of
/// the stationary vector keeps full relative accuracy. Returns false when a
/// reduction pivot vanishes.
bool gth_stationary(std::vector<std::vector<Quad>> p, std::vector<Quad>& pi) {
  const std::size_t n = p.size();
  for (std::size_t k = n - 1; k >= 1; --k) {
    Quad s = 0;
    for (std::size_t j = 0; j < k; ++j) s += p[k][j];
    if (!(s > 0)) return false;
    for (std::size_t i = 0; i < k; ++i) p[i][k] /= s;
    for (std::size_t i = 0; i < k; ++i) {
      const Quad pik = p[i][k];
      if (pik == 0) continue;
      for (std::size_t j = 0; j < k; ++j) p[i][j] += pik * p[k][j];
    }
  }
  pi.assign(n, 0);
  pi[0] = 1;
  Quad total = 1;
  for (std::size_t j = 1; j < n; ++j) {
    Quad acc = 0;
    for (std::size_t i = 0; i < j; ++i) acc += pi[i] * p[i][j];
    pi[j] = acc;
    total += acc;
  }
  for (auto& x : pi) x /= total;
  return true;
}

Quad quad_threshold_sigma(const MdpModel& model, std::size_t threshold) {
  const std::size_t n = model.n_states();
  const StationaryPolicy policy = StationaryPolicy::threshold(model, threshold);
  std::vector<std::vector<Quad>> p(n, std::vector<Quad>(n, 0));
  std::vector<Quad> r(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Action a = policy.prob(i, Action::A2) > 0.5 ? Action::A2 : Action::A1;
    for (std::size_t j = 0; j < n; ++j)
      p[i][j] = static_cast<Quad>(model.kernel(a)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    r[i] = static_cast<Quad>(model.reward(i, a));
  }
  std::vector<Quad> pi;
  if (!gth_stationary(p, pi)) {
    const Distribution d = stationary_distribution(policy_kernel(model, policy));
    pi.resize(n);
    for (std::size_t i = 0; i < n; ++i) pi[i] = static_cast<Quad>(d.probs(static_cast<Eigen::Index>(i)));
  }
  Quad sigma = 0;
  for (std::size_t i = 0; i < n; ++i) sigma += pi[i] * r[i];
  return sigma;
}

}  // namespace

std::vector<Action> greedy_actions(const MdpModel& model, const Vector& v, double tie_tol) {
  Vector scratch;
  std::vector<Action> greedy;
  bellman(model, v, scratch, &greedy, tie_tol);
  return greedy;
}

ViaResult value_iteration(const MdpModel& model, const SolverOptions& opts) {
  check_ref(model, opts.ref_state);
  const auto n = static_cast<Eigen::Index>(model.n_states());
  ViaResult res;
  res.report.solver = "value_iteration";
  Vector v = Vector::Zero(n);
  Vector next;
  res.trace.iterates.push_back(v);
  double last_span = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= opts.max_iters; ++it) {
    bellman(model, v, next, nullptr);
    const Vector diff = next - v;
    last_span = span(diff);
    res.gain = diff(static_cast<Eigen::Index>(opts.ref_state));
    v.swap(next);
    if (opts.keep_trace) res.trace.iterates.push_back(v);
    if (last_span < opts.tol) {
      if (!opts.keep_trace) res.trace.iterates.push_back(v);
      res.report.iterations = it;
      res.report.final_span = last_span;
      res.report.sigma = res.gain;
      res.report.converged = true;
      res.greedy = greedy_actions(model, v, opts.tie_tol);
      return res;
    }
  }
  fail_nonconvergence("value_iteration", opts.max_iters, last_span);
}

RviaResult rvia(const MdpModel& model, const SolverOptions& opts) {
  check_ref(model, opts.ref_state);
  const auto n = static_cast<Eigen::Index>(model.n_states());
  const auto ref = static_cast<Eigen::Index>(opts.ref_state);
  RviaResult res;
  res.report.solver = "rvia";
  Vector v = Vector::Zero(n);
  Vector w;
  double last_span = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= opts.max_iters; ++it) {
    bellman(model, v, w, nullptr);
    const double offset = w(ref);
    w.array() -= offset;
    last_span = span(w - v);
    v.swap(w);
    if (last_span < opts.tol) {
      res.table = ValueTable{v, offset, opts.ref_state};
      res.table.values(ref) = 0.0;
      res.greedy = greedy_actions(model, v, opts.tie_tol);
      res.report.iterations = it;
      res.report.final_span = last_span;
      res.report.sigma = offset;
      res.report.converged = true;
      return res;
    }
  }
  fail_nonconvergence("rvia", opts.max_iters, last_span);
}

ThresholdEvaluation evaluate_threshold(const MdpModel& model, double T, MixerKind mixer, std::size_t ref_state) {
  check_ref(model, ref_state);
  const ThresholdPolicy policy(T, mixer, model.last_state());
  const MixedKernelRules rules = threshold_rules(model);
  const Matrix P = randomized_kernel(rules, policy);
  const Vector r = randomized_reward(rules, policy);
  const auto n = P.rows();
  const auto ref = static_cast<Eigen::Index>(ref_state);

  // V - P V + sigma 1 = r with V(ref) = 0; the ref column carries sigma instead.
  Matrix m = Matrix::Identity(n, n) - P;
  m.col(ref).setOnes();
  const Vector x = m.partialPivLu().solve(r);

  ThresholdEvaluation out;
  out.sigma = x(ref);
  out.table.values = x;
  out.table.values(ref) = 0.0;
  out.table.sigma = out.sigma;
  out.table.ref_state = ref_state;
  out.stationary = stationary_distribution(P);
  const Vector resid = out.table.values - (r.array() - out.sigma).matrix() - P * out.table.values;
  out.poisson_residual = resid.cwiseAbs().maxCoeff();
  if (!x.allFinite()) throw SolverError("Poisson equation solve produced non-finite values", out.poisson_residual);
  return out;
}

double exact_sigma_gradient(const MdpModel& model, double T, MixerKind mixer, OneSided side) {
  if (!(T >= 0.0 && T <= static_cast<double>(model.last_state())))
    throw std::invalid_argument("gradient requested outside [0, N]");
  const ThresholdEvaluation ev = evaluate_threshold(model, T, mixer);
  const ThresholdPolicy policy(T, mixer, model.last_state());
  const MixedKernelRules rules = threshold_rules(model);
  const Matrix dP = kernel_gradient(rules, policy, side);
  const Vector dr = reward_gradient(rules, policy, side);
  return ev.stationary.probs.dot(dr + dP * ev.table.values);
}

OptimalThreshold brute_force_optimal_threshold(const MdpModel& model) {
  OptimalThreshold out;
  const std::size_t N = model.last_state();
  Quad best = 0;
  for (std::size_t t = 0; t <= N; ++t) {
    const Quad s = quad_threshold_sigma(model, t);
    out.sweep.push_back(static_cast<double>(s));
    if (t == 0 || s > best) {
      best = s;
      out.threshold = t;
    }
  }
  out.sigma = static_cast<double>(best);
  return out;
}

std::vector<double> integer_threshold_sweep(const MdpModel& model) {
  std::vector<double> out;
  for (std::size_t t = 0; t <= model.last_state(); ++t)
    out.push_back(exact_average_reward(model, StationaryPolicy::threshold(model, t)));
  return out;
}

std::string format_report(const SolverReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "solver = " << report.solver << "\n"
     << "iterations = " << report.iterations << "\n"
     << "final_span = " << report.final_span << "\n"
     << "sigma = " << report.sigma << "\n"
     << "converged = " << (report.converged ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace structrl

#include "structrl/learners.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace structrl {

namespace {

constexpr std::uint64_t kAuxStream = 1;

Action greedy_q(const Matrix& q, std::size_t i, const MdpModel& model) {
  const auto row = static_cast<Eigen::Index>(i);
  if (!model.feasible(i, Action::A1)) return Action::A2;
  if (!model.feasible(i, Action::A2)) return Action::A1;
  return q(row, 1) >= q(row, 0) ? Action::A2 : Action::A1;
}

double max_q(const Matrix& q, std::size_t i, const MdpModel& model) {
  const Action a = greedy_q(q, i, model);
  return q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(index_of(a)));
}

/// Best answer to an arrival in post-decision state s; ties admit.
Action pds_choice(const Vector& v, const EventDecomposition& ev, std::size_t s, double* value) {
  auto score = [&](Action a) {
    return ev.decision_reward(s, a) + v(static_cast<Eigen::Index>(ev.post_decision(s, a)));
  };
  const double reject = score(Action::A1);
  if (s >= ev.capacity()) {
    if (value) *value = reject;
    return Action::A1;
  }
  const double admit = score(Action::A2);
  if (value) *value = std::max(admit, reject);
  return admit >= reject ? Action::A2 : Action::A1;
}

const EventDecomposition& require_events(const SamplingEnv& env) {
  if (!env.events()) throw std::logic_error("PDS learning needs an environment with an exogenous-event decomposition");
  return *env.events();
}

}  // namespace

std::string_view to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::Sal:
      return "sal";
    case LearnerKind::QLearning:
      return "q_learning";
    case LearnerKind::Pds:
      return "pds";
  }
  return "unknown";
}

LearnerKind parse_learner(std::string_view name) {
  if (name == "sal") return LearnerKind::Sal;
  if (name == "q_learning" || name == "q") return LearnerKind::QLearning;
  if (name == "pds") return LearnerKind::Pds;
  throw std::invalid_argument("unknown learner '" + std::string(name) + "'");
}

std::string_view to_string(DualTarget target) {
  return target == DualTarget::ValueOnly ? "value_only" : "action_value";
}

DualTarget parse_dual_target(std::string_view name) {
  if (name == "value_only") return DualTarget::ValueOnly;
  if (name == "action_value") return DualTarget::ActionValue;
  throw std::invalid_argument("unknown dual target '" + std::string(name) + "'");
}

LearnerState::LearnerState(LearnerKind k, const LearnerConfig& cfg, std::size_t n_states, std::uint64_t seed)
    : kind(k), config(cfg), rng(seed, kAuxStream) {
  if (cfg.ref_state >= n_states) throw std::invalid_argument("reference state out of range");
  const auto n = static_cast<Eigen::Index>(n_states);
  if (k == LearnerKind::QLearning) {
    q = Matrix::Zero(n, kNumActions);
    local_clocks.assign(n_states * kNumActions, 0);
  } else {
    values = Vector::Zero(n);
    local_clocks.assign(n_states, 0);
  }
}

std::size_t LearnerState::storage_size() const {
  switch (kind) {
    case LearnerKind::Sal:
      return static_cast<std::size_t>(values.size()) + 1;
    case LearnerKind::QLearning:
      return static_cast<std::size_t>(q.size());
    case LearnerKind::Pds:
      return static_cast<std::size_t>(values.size());
  }
  return 0;
}

bool LearnerState::finite() const {
  return values.allFinite() && q.allFinite() && std::isfinite(threshold);
}

double dual_threshold_update(double T, double step, double mix_grad, bool gamma, double target, double upper) {
  const double sign = gamma ? -1.0 : 1.0;
  return std::clamp(T + step * mix_grad * sign * target, 0.0, upper);
}

void sal_step(LearnerState& s, SamplingEnv& env) {
  const MdpModel& model = env.model();
  const std::size_t i = s.current_state;
  const auto& V = s.values;
  const ThresholdPolicy policy(s.threshold, s.config.mixer, model.last_state());
  s.ops.begin();

  // Act under the randomized threshold policy.
  const bool can_advance = model.feasible(i, Action::A2);
  const double w = can_advance ? policy.a1_weight(i) : 1.0;
  const Action a = s.rng.uniform() < w ? Action::A1 : Action::A2;
  const auto [j, reward] = env.sample_transition(i, a);
  const std::size_t n = ++s.global_clock;

  // Slow update on V_n: gamma = 1 draws k from the A2 rule, gamma = 0 from the A1 rule.
  const bool gamma = s.rng.coin();
  const Action rule = (gamma && can_advance) ? Action::A2 : Action::A1;
  const std::size_t k = s.rng.categorical(model.kernel_row(i, rule));
  double target = V(static_cast<Eigen::Index>(k));
  s.ops.touch();
  if (s.config.dual_target == DualTarget::ActionValue) target += model.reward(i, rule);
  const double grad = policy.a1_weight_grad(i, OneSided::Right);
  const double next_T = dual_threshold_update(s.threshold, s.config.schedules.dual(n), grad, gamma, target,
                                              static_cast<double>(model.last_state()));

  // Fast update touches state i only.
  const std::size_t eta = ++s.local_clocks[i];
  const double g = s.config.schedules.primal(eta);
  const auto ii = static_cast<Eigen::Index>(i);
  const double td = reward + V(static_cast<Eigen::Index>(j)) - V(static_cast<Eigen::Index>(s.config.ref_state));
  s.values(ii) = (1.0 - g) * V(ii) + g * td;
  s.ops.touch(4);

  s.threshold = next_T;
  s.last_reward = reward;
  s.current_state = j;
}

void q_learning_step(LearnerState& s, SamplingEnv& env) {
  const MdpModel& model = env.model();
  const std::size_t i = s.current_state;
  const std::size_t n = ++s.global_clock;
  s.ops.begin();

  const double eps = std::min(1.0, s.config.exploration_scale / static_cast<double>(n));
  Action a = greedy_q(s.q, i, model);
  s.ops.touch(kNumActions);
  if (s.rng.uniform() < eps) {
    const auto options = model.feasible_actions(i);
    const auto pick = std::min(options.size() - 1, static_cast<std::size_t>(s.rng.uniform() * options.size()));
    a = options[pick];
  }

  const auto [j, reward] = env.sample_transition(i, a);
  const std::size_t slot = kNumActions * i + index_of(a);
  const double g = s.config.schedules.primal(++s.local_clocks[slot]);
  const double target = reward + max_q(s.q, j, model) - max_q(s.q, s.config.ref_state, model);
  s.ops.touch(2 * kNumActions);
  double& cell = s.q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(index_of(a)));
  cell += g * (target - cell);
  s.ops.touch(2);

  s.last_reward = reward;
  s.current_state = j;
}

void pds_learning_step(LearnerState& s, SamplingEnv& env) {
  const EventDecomposition& ev = require_events(env);
  const std::size_t post = s.current_state;
  ++s.global_clock;
  s.ops.begin();

  const double hold = ev.holding_reward[post];
  double continuation = 0.0;
  double reward = hold;
  std::size_t next = 0;
  if (env.sample_arrival()) {
    const Action a = pds_choice(s.values, ev, post, &continuation);
    s.ops.touch(kNumActions);
    reward += ev.decision_reward(post, a);
    next = ev.post_decision(post, a);
  } else {
    next = post > 0 ? post - 1 : 0;
    continuation = s.values(static_cast<Eigen::Index>(next));
    s.ops.touch();
  }

  const double target = hold + continuation - s.values(static_cast<Eigen::Index>(s.config.ref_state));
  // Without exploration, rarely entered post-decision states keep their
  // optimistic zero start only if one early visit cannot overwrite it, so the
  // step follows the global clock rather than eta(s, n).
  ++s.local_clocks[post];
  const double g = s.config.schedules.primal(s.global_clock);
  const auto idx = static_cast<Eigen::Index>(post);
  s.values(idx) = (1.0 - g) * s.values(idx) + g * target;
  s.ops.touch(3);

  s.last_reward = reward;
  s.current_state = next;
}

void learner_step(LearnerState& state, SamplingEnv& env) {
  switch (state.kind) {
    case LearnerKind::Sal:
      return sal_step(state, env);
    case LearnerKind::QLearning:
      return q_learning_step(state, env);
    case LearnerKind::Pds:
      return pds_learning_step(state, env);
  }
}

std::vector<Action> greedy_policy(const LearnerState& s, const SamplingEnv& env) {
  const MdpModel& model = env.model();
  std::vector<Action> out(model.n_states(), Action::A1);
  for (std::size_t i = 0; i < model.n_states(); ++i) {
    switch (s.kind) {
      case LearnerKind::Sal: {
        const ThresholdPolicy policy(s.threshold, s.config.mixer, model.last_state());
        if (model.feasible(i, Action::A2) && policy.a1_weight(i) <= 0.5) out[i] = Action::A2;
        break;
      }
      case LearnerKind::QLearning:
        out[i] = greedy_q(s.q, i, model);
        break;
      case LearnerKind::Pds:
        out[i] = pds_choice(s.values, require_events(env), i, nullptr);
        break;
    }
  }
  return out;
}

StationaryPolicy current_policy(const LearnerState& s, const SamplingEnv& env) {
  if (s.kind == LearnerKind::Sal)
    return ThresholdPolicy(s.threshold, s.config.mixer, env.model().last_state()).as_stationary(env.model());
  const auto actions = greedy_policy(s, env);
  return StationaryPolicy::deterministic(actions);
}

double PolicyEvaluator::sigma(const StationaryPolicy& policy) {
  const Matrix& rule = policy.rule();
  const bool deterministic = ((rule.array() == 0.0) || (rule.array() == 1.0)).all();
  if (!deterministic) return exact_average_reward(*model_, policy);
  std::vector<std::uint8_t> key(policy.n_states());
  for (std::size_t i = 0; i < key.size(); ++i) key[i] = policy.prob(i, Action::A2) > 0.5 ? 1 : 0;
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const double s = exact_average_reward(*model_, policy);
  cache_.emplace(std::move(key), s);
  return s;
}

RunTrace run_learner(LearnerKind kind, const EnvSpec& spec, const LearnerConfig& config, std::uint64_t seed,
                     std::size_t iters) {
  if (iters < 1) throw std::invalid_argument("run_learner needs at least one iteration");
  if (!spec.model) throw std::invalid_argument("run_learner needs a model");
  SamplingEnv env(spec.model, seed, spec.events);
  if (kind == LearnerKind::Pds) require_events(env);
  LearnerState state(kind, config, spec.model->n_states(), seed);
  PolicyEvaluator evaluator(spec.model);

  RunTrace trace;
  trace.kind = kind;
  trace.seed = seed;
  trace.rows.reserve(iters);
  std::deque<double> recent;
  double recent_sum = 0.0;
  double cum = 0.0;
  for (std::size_t it = 0; it < iters; ++it) {
    learner_step(state, env);
    if (!state.finite()) {
      trace.failed = true;
      trace.failure = "non-finite learner state at iteration " + std::to_string(state.global_clock);
      break;
    }
    recent.push_back(state.last_reward);
    recent_sum += state.last_reward;
    if (recent.size() > config.empirical_window) {
      recent_sum -= recent.front();
      recent.pop_front();
    }
    cum += config.schedules.primal(state.global_clock);

    TraceRow row;
    row.n = state.global_clock;
    row.cum_step = cum;
    row.sigma_exact = evaluator.sigma(current_policy(state, env));
    row.sigma_empirical = recent_sum / static_cast<double>(recent.size());
    row.threshold = kind == LearnerKind::Sal ? state.threshold
                                             : static_cast<double>(switch_point(greedy_policy(state, env)));
    row.ops = state.ops.last_iteration;
    trace.rows.push_back(row);
  }
  trace.final_greedy = greedy_policy(state, env);
  trace.final_threshold = kind == LearnerKind::Sal ? state.threshold
                                                   : static_cast<double>(switch_point(trace.final_greedy));
  trace.storage = state.storage_size();
  return trace;
}

std::string_view to_string(StopRule rule) { return rule == StopRule::FirstWindow ? "first_window" : "settled"; }

std::vector<int> stable_windows(const RunTrace& trace, double window_mass, double tolerance) {
  const auto& rows = trace.rows;
  std::vector<int> out(rows.size(), -1);
  // Sliding max/min over [n, end) with end non-decreasing in n.
  std::deque<std::size_t> hi, lo;
  std::size_t end = 0;
  for (std::size_t n = 0; n < rows.size(); ++n) {
    while (!hi.empty() && hi.front() < n) hi.pop_front();
    while (!lo.empty() && lo.front() < n) lo.pop_front();
    while (end < rows.size() && rows[end].cum_step - rows[n].cum_step <= window_mass) {
      const double s = rows[end].sigma_exact;
      while (!hi.empty() && rows[hi.back()].sigma_exact <= s) hi.pop_back();
      while (!lo.empty() && rows[lo.back()].sigma_exact >= s) lo.pop_back();
      hi.push_back(end);
      lo.push_back(end);
      ++end;
    }
    if (end == rows.size()) break;  // window not fully observed
    const double ref = rows[n].sigma_exact;
    const double band = tolerance * (ref == 0.0 ? 1.0 : std::abs(ref));
    const bool ok = rows[hi.front()].sigma_exact - ref <= band && ref - rows[lo.front()].sigma_exact <= band;
    out[n] = ok ? 1 : 0;
  }
  return out;
}

StoppingResult iterations_to_stopping(const RunTrace& trace, double window_mass, double tolerance, StopRule rule) {
  StoppingResult out;
  const auto& rows = trace.rows;
  out.iteration = rows.empty() ? 0 : rows.back().n;
  if (!rows.empty()) out.sigma_at_stop = rows.back().sigma_exact;
  const auto flags = stable_windows(trace, window_mass, tolerance);

  std::optional<std::size_t> hit;
  if (rule == StopRule::FirstWindow) {
    for (std::size_t n = 0; n < flags.size() && flags[n] >= 0; ++n)
      if (flags[n] == 1) {
        hit = n;
        break;
      }
  } else {
    std::size_t last_fit = flags.size();
    for (std::size_t n = 0; n < flags.size(); ++n)
      if (flags[n] >= 0) last_fit = n;
    if (last_fit < flags.size() && flags[last_fit] == 1) {
      std::size_t n = last_fit;
      while (n > 0 && flags[n - 1] == 1) --n;
      hit = n;
    }
  }
  if (hit) {
    out.stopped = true;
    out.iteration = rows[*hit].n;
    out.sigma_at_stop = rows[*hit].sigma_exact;
  }
  return out;
}

}  // namespace structrl

#include "structrl/environments.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace structrl {

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::size_t EventDecomposition::post_decision(std::size_t s, Action a) const {
  return (a == Action::A2 && s < capacity()) ? s + 1 : s;
}

double EventDecomposition::decision_reward(std::size_t s, Action a) const {
  return (a == Action::A2 && s < capacity()) ? 0.0 : block_reward;
}

std::vector<double> KooleQueueConfig::power_holding(std::size_t capacity, double coeff, double power) {
  std::vector<double> h(capacity + 1);
  for (std::size_t i = 0; i <= capacity; ++i) h[i] = coeff * std::pow(static_cast<double>(i), power);
  return h;
}

KooleQueueConfig KooleQueueConfig::default_instance(double service_rate) {
  KooleQueueConfig c;
  c.service_rate = service_rate;
  c.holding_cost = power_holding(c.capacity, 0.1, 2.0);
  return c;
}

void KooleQueueConfig::validate() const {
  if (capacity < 1) throw std::invalid_argument("queue capacity must be at least 1");
  if (!(arrival_rate > 0.0) || !(service_rate > 0.0) || !std::isfinite(arrival_rate) || !std::isfinite(service_rate))
    throw std::invalid_argument("arrival and service rates must be positive");
  if (!(blocking_cost >= 0.0)) throw std::invalid_argument("blocking cost must be nonnegative");
  if (holding_cost.size() != capacity + 1)
    throw std::invalid_argument("holding cost needs capacity + 1 entries, got " + std::to_string(holding_cost.size()));
  for (std::size_t i = 1; i + 1 < holding_cost.size(); ++i) {
    const double second = holding_cost[i + 1] - 2.0 * holding_cost[i] + holding_cost[i - 1];
    if (second < -1e-12) throw std::invalid_argument("holding cost must be convex (second difference at " +
                                                     std::to_string(i) + " is negative)");
  }
}

MdpModel koole_queue_model(const KooleQueueConfig& config) {
  config.validate();
  const double p = config.arrival_rate / (config.arrival_rate + config.service_rate);
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("uniformization produced an invalid arrival probability");

  MdpModel shape = build_birth_death_model(config.capacity, p, 0.0);
  Matrix reward(static_cast<Eigen::Index>(config.capacity + 1), kNumActions);
  for (std::size_t i = 0; i <= config.capacity; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    reward(row, 0) = -(config.holding_cost[i] + p * config.blocking_cost);
    reward(row, 1) = i < config.capacity ? -config.holding_cost[i] : 0.0;
  }
  std::vector<std::array<bool, kNumActions>> feasible(config.capacity + 1);
  for (std::size_t i = 0; i <= config.capacity; ++i) feasible[i] = {true, i < config.capacity};
  Matrix admit = shape.kernel(Action::A2);
  return MdpModel({shape.kernel(Action::A1), std::move(admit)}, std::move(reward), std::move(feasible));
}

EventDecomposition koole_event_decomposition(const KooleQueueConfig& config) {
  config.validate();
  EventDecomposition ev;
  ev.arrival_prob = config.arrival_rate / (config.arrival_rate + config.service_rate);
  ev.block_reward = -config.blocking_cost;
  ev.holding_reward.resize(config.capacity + 1);
  for (std::size_t i = 0; i <= config.capacity; ++i) ev.holding_reward[i] = -config.holding_cost[i];
  return ev;
}

SamplingEnv::SamplingEnv(std::shared_ptr<const MdpModel> model, std::uint64_t seed,
                         std::optional<EventDecomposition> events)
    : model_(std::move(model)), events_(std::move(events)), rng_(seed, 0) {
  if (!model_) throw std::invalid_argument("sampling environment needs a model");
  if (events_ && events_->holding_reward.size() != model_->n_states())
    throw std::invalid_argument("event decomposition does not match the model's state space");
}

SamplingEnv::Transition SamplingEnv::sample_transition(std::size_t i, Action a) {
  if (i >= model_->n_states() || !model_->feasible(i, a))
    throw std::logic_error("action " + std::string(to_string(a)) + " is not feasible in state " + std::to_string(i));
  const std::size_t j = rng_.categorical(model_->kernel_row(i, a));
  return {j, model_->reward(i, a)};
}

bool SamplingEnv::sample_arrival() {
  if (!events_) throw std::logic_error("environment has no exogenous-event decomposition");
  return rng_.uniform() < events_->arrival_prob;
}

}  // namespace structrl

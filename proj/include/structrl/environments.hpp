#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "structrl/mdp.hpp"

namespace structrl {

/// Seeded 64-bit stream. Identical (seed, stream) pairs give identical draws on
/// every platform because the uniform conversion is done by hand.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  double uniform();
  bool coin() { return uniform() < 0.5; }
  /// Inverse-CDF draw from a probability row.
  template <typename Row>
  std::size_t categorical(const Row& probs) {
    const double u = uniform();
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (Eigen::Index j = 0; j < probs.size(); ++j) {
      const double p = probs(j);
      if (p <= 0.0) continue;
      last_positive = static_cast<std::size_t>(j);
      acc += p;
      if (u < acc) return static_cast<std::size_t>(j);
    }
    return last_positive;
  }

 private:
  std::mt19937_64 engine_;
};

/// Exogenous-event view of an admission queue for post-decision-state learning.
/// Each step draws an arrival (prob arrival_prob) or a departure. An arrival
/// admitted in state s leads to s + 1; rejected or blocked it stays at s and pays
/// block_reward. Every step also pays holding_reward(s).
struct EventDecomposition {
  double arrival_prob = 0.5;
  std::vector<double> holding_reward;
  double block_reward = 0.0;

  std::size_t capacity() const { return holding_reward.size() - 1; }
  /// Post-decision occupancy after answering an arrival in s with a.
  std::size_t post_decision(std::size_t s, Action a) const;
  double decision_reward(std::size_t s, Action a) const;
};

struct KooleQueueConfig {
  std::size_t capacity = 20;
  double arrival_rate = 1.0;
  double service_rate = 1.2;
  double blocking_cost = 10.0;
  /// Holding cost per occupancy 0..capacity; must be convex.
  std::vector<double> holding_cost;

  /// holding_cost(i) = coeff * i^power for i in 0..capacity.
  static std::vector<double> power_holding(std::size_t capacity, double coeff, double power);
  static KooleQueueConfig default_instance(double service_rate = 1.2);

  void validate() const;
};

/// Uniformized M/M/1/N admission control with rewards = -costs. In state i the
/// next event is an arrival w.p. lambda/(lambda+mu), else a departure; A2 admits
/// the arrival and A1 rejects it at expected cost blocking_cost * lambda/(lambda+mu).
MdpModel koole_queue_model(const KooleQueueConfig& config);
EventDecomposition koole_event_decomposition(const KooleQueueConfig& config);

/// A model plus its seeded transition stream; owned by one run.
class SamplingEnv {
 public:
  SamplingEnv(std::shared_ptr<const MdpModel> model, std::uint64_t seed,
              std::optional<EventDecomposition> events = std::nullopt);

  struct Transition {
    std::size_t next;
    double reward;
  };

  const MdpModel& model() const { return *model_; }
  std::shared_ptr<const MdpModel> shared_model() const { return model_; }
  const std::optional<EventDecomposition>& events() const { return events_; }

  /// Draws j ~ p_i.(a); throws std::logic_error on an infeasible action.
  Transition sample_transition(std::size_t i, Action a);
  /// True for an arrival, false for a departure. Needs an event decomposition.
  bool sample_arrival();

 private:
  std::shared_ptr<const MdpModel> model_;
  std::optional<EventDecomposition> events_;
  Rng rng_;
};

}  // namespace structrl

#pragma once

#include <cstddef>
#include <string_view>

namespace structrl {

/**
 * Step-size law n -> step, n >= 1.
 *
 * Primal (fast): scale / ceil(n / block)^exponent, square-summable for
 * exponent in (0.5, 1]. Dual (slow): scale / (1 + n log(n + 2) / divisor),
 * which is ~ divisor / (n log n), not summable but square-summable.
 */
struct StepSchedule {
  enum class Kind { Primal, Dual };

  Kind kind = Kind::Primal;
  double scale = 1.0;
  double block = 10.0;
  double exponent = 0.6;
  double divisor = 100.0;

  double operator()(std::size_t n) const;

  /// Robbins-Monro conditions, decided from the law's parameters.
  bool sum_diverges() const;
  bool square_summable() const;
};

struct SchedulePair {
  StepSchedule primal;
  StepSchedule dual;

  /// h(n) / g(n) -> 0, decided from the laws' parameters.
  bool timescales_separate() const;
};

SchedulePair default_schedules();

std::string_view to_string(StepSchedule::Kind kind);

}  // namespace structrl

#include "structrl/schedules.hpp"

#include <cmath>
#include <stdexcept>

namespace structrl {

double StepSchedule::operator()(std::size_t n) const {
  if (n == 0) throw std::invalid_argument("step schedules are indexed from n = 1");
  const double x = static_cast<double>(n);
  if (kind == Kind::Primal) return scale / std::pow(std::ceil(x / block), exponent);
  return scale / (1.0 + x * std::log(x + 2.0) / divisor);
}

bool StepSchedule::sum_diverges() const {
  if (scale <= 0.0) return false;
  // sum 1/(n log n) diverges; the primal law needs exponent <= 1.
  return kind == Kind::Dual || exponent <= 1.0;
}

bool StepSchedule::square_summable() const {
  if (scale <= 0.0) return true;
  return kind == Kind::Dual || exponent > 0.5;
}

bool SchedulePair::timescales_separate() const {
  // h/g ~ n^exponent / (n log n) -> 0 whenever the primal exponent is at most 1.
  return primal.kind == StepSchedule::Kind::Primal && dual.kind == StepSchedule::Kind::Dual &&
         primal.exponent <= 1.0 && primal.scale > 0.0;
}

SchedulePair default_schedules() {
  SchedulePair s;
  s.primal.kind = StepSchedule::Kind::Primal;
  s.dual.kind = StepSchedule::Kind::Dual;
  return s;
}

std::string_view to_string(StepSchedule::Kind kind) { return kind == StepSchedule::Kind::Primal ? "primal" : "dual"; }

}  // namespace structrl

#include <doctest.h>

#include <cmath>

#include "structrl/schedules.hpp"

using namespace structrl;

TEST_CASE("default step laws") {
  const SchedulePair s = default_schedules();
  CHECK(s.primal(1) == 1.0);
  CHECK(s.primal(10) == 1.0);
  CHECK(s.primal(11) == doctest::Approx(std::pow(2.0, -0.6)));
  CHECK(s.dual(1) == doctest::Approx(1.0 / (1.0 + std::log(3.0) / 100.0)));
  CHECK_THROWS(s.primal(0));
}

TEST_CASE("timescale ratio") {
  const SchedulePair s = default_schedules();
  // Closed forms at n = 1e5: h = 1/(1 + 1e3 log(100002)) and g = 1e4^-0.6.
  const double n = 1e5;
  const double expected = (1.0 / (1.0 + n * std::log(n + 2.0) / 100.0)) / std::pow(1e4, -0.6);
  const double ratio = s.dual(100'000) / s.primal(100'000);
  CHECK(ratio == doctest::Approx(expected).epsilon(1e-12));
  CHECK(ratio == doctest::Approx(0.0218).epsilon(0.01));
  CHECK(ratio < 0.1);
  // Decreasing along block starts and below 0.1 beyond 1e4.
  double prev = 1e300;
  for (std::size_t m = 1000; m <= 200'000; m += 250) {
    const std::size_t k = 10 * m + 1;
    const double r = s.dual(k) / s.primal(k);
    CHECK(r < prev);
    CHECK(r < 0.1);
    prev = r;
  }
  CHECK(s.timescales_separate());
}

TEST_CASE("square-summability trend of the primal law") {
  const SchedulePair s = default_schedules();
  double sum = 0.0, sq = 0.0, sq_half = 0.0;
  for (std::size_t n = 1; n <= 1'000'000; ++n) {
    const double g = s.primal(n);
    sum += g;
    sq += g * g;
    if (n == 500'000) sq_half = sq;
  }
  CHECK(std::isfinite(sq));
  // The second half adds far less than the first: sublinear growth of the partial sums.
  CHECK(sq - sq_half < 0.05 * sq_half);
  CHECK(sum > 1000.0);
}

TEST_CASE("Robbins-Monro flags follow the parameters") {
  StepSchedule g;
  CHECK(g.sum_diverges());
  CHECK(g.square_summable());
  g.exponent = 0.4;
  CHECK_FALSE(g.square_summable());
  g.exponent = 1.2;
  CHECK_FALSE(g.sum_diverges());
  SchedulePair bad = default_schedules();
  bad.primal.exponent = 1.5;
  CHECK_FALSE(bad.timescales_separate());
}

#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "structrl/dp_oracle.hpp"
#include "structrl/threshold.hpp"

using namespace structrl;

TEST_CASE("sigmoid mixer values") {
  CHECK(sigmoid_mix(3, 2.5) == 0.5);
  CHECK(sigmoid_mix(10, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-9.5))).epsilon(1e-15));
  CHECK(sigmoid_mix(10, 0) == doctest::Approx(0.9999252).epsilon(1e-7));
  CHECK(sigmoid_mix(0, 10) == doctest::Approx(2.7465e-5).epsilon(1e-4));
  // Stable far out in both tails.
  CHECK(sigmoid_mix(0, 800) >= 0.0);
  CHECK(sigmoid_mix(800, 0) == 1.0);
}

TEST_CASE("sigmoid gradient") {
  CHECK(grad_sigmoid_wrt_T(3, 2.5) == -0.25);
  const double d = 1e-6;
  const double fd = (sigmoid_mix(4, 1.7 + d) - sigmoid_mix(4, 1.7 - d)) / (2 * d);
  CHECK(std::abs(grad_sigmoid_wrt_T(4, 1.7) - fd) < 1e-8);
  CHECK(std::abs(grad_sigmoid_wrt_T(0, 20)) < 1e-8);
  for (double T : {-30.0, 0.0, 3.3, 30.0})
    for (int i = 0; i < 20; ++i) CHECK(grad_sigmoid_wrt_T(i, T) < 0.0);
}

TEST_CASE("piecewise-linear mixer") {
  CHECK(piecewise_linear_mix(2, 3.0) == 0.0);
  CHECK(piecewise_linear_mix(5, 4.25) == 0.75);
  CHECK(piecewise_linear_mix(7, 2) == 1.0);
}

TEST_CASE("mixers increase in the state") {
  for (double T : {0.0, 2.2, 7.9}) {
    for (int i = 0; i < 12; ++i) {
      CHECK(sigmoid_mix(i + 1, T) > sigmoid_mix(i, T));
      CHECK(piecewise_linear_mix(i + 1, T) >= piecewise_linear_mix(i, T));
    }
  }
}

TEST_CASE("threshold policy bounds and kinks") {
  CHECK_THROWS(ThresholdPolicy(-0.1, MixerKind::Sigmoid, 5));
  CHECK_THROWS(ThresholdPolicy(5.1, MixerKind::Sigmoid, 5));
  const ThresholdPolicy pl(2.0, MixerKind::PiecewiseLinear, 5);
  CHECK_FALSE(pl.differentiable_at(1));
  CHECK_THROWS_AS(pl.a1_weight_grad(1), std::domain_error);
  // Raising T at the kink keeps state 1 on the A2 rule; lowering it mixes A1 in.
  CHECK(pl.a1_weight_grad(1, OneSided::Right) == 0.0);
  CHECK(pl.a1_weight_grad(1, OneSided::Left) == -1.0);
  const ThresholdPolicy inside(2.4, MixerKind::PiecewiseLinear, 5);
  CHECK(inside.a1_weight_grad(2) == -1.0);
  CHECK(inside.a1_weight_grad(4) == 0.0);
}

TEST_CASE("randomized kernel") {
  SUBCASE("sigmoid at T = N is close to the A2 rule in state 0") {
    for (std::size_t N : {10, 15, 30}) {
      const MdpModel m = build_birth_death_model(N, 0.4, 1.0);
      const MixedKernelRules rules = threshold_rules(m);
      const ThresholdPolicy pol(static_cast<double>(N), MixerKind::Sigmoid, N);
      const Matrix P = randomized_kernel(rules, pol);
      const double dev = (P.row(0) - rules.below_rule.row(0)).cwiseAbs().maxCoeff();
      // The mixer is read at T - 1, so state 0 carries weight f(0, N - 1).
      CHECK(dev <= sigmoid_mix(0, static_cast<double>(N) - 1.0));
      CHECK(sigmoid_mix(0, static_cast<double>(N) - 1.0) < 1e-4);
    }
  }
  SUBCASE("piecewise-linear at integer T is the deterministic threshold kernel") {
    const MdpModel m = build_birth_death_model(6, 0.35, 1.0);
    const MixedKernelRules rules = threshold_rules(m);
    for (std::size_t T = 0; T <= 6; ++T) {
      const Matrix P = randomized_kernel(rules, ThresholdPolicy(static_cast<double>(T), MixerKind::PiecewiseLinear, 6));
      CHECK(P == policy_kernel(m, StationaryPolicy::threshold(m, T)));
    }
  }
  SUBCASE("rows sum to one") {
    const MdpModel m = build_birth_death_model(8, 0.7, 1.0);
    const MixedKernelRules rules = threshold_rules(m);
    for (double T : {0.0, 0.37, 3.5, 7.99, 8.0})
      for (MixerKind k : {MixerKind::Sigmoid, MixerKind::PiecewiseLinear}) {
        const Matrix P = randomized_kernel(rules, ThresholdPolicy(T, k, 8));
        CHECK((P.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
      }
  }
  SUBCASE("dimension mismatch") {
    const MixedKernelRules rules = threshold_rules(build_birth_death_model(4, 0.5, 1.0));
    CHECK_THROWS(randomized_kernel(rules, ThresholdPolicy(1.0, MixerKind::Sigmoid, 5)));
  }
}

TEST_CASE("kernel gradient") {
  const MdpModel m = build_birth_death_model(5, 0.5, 1.0);
  const MixedKernelRules rules = threshold_rules(m);
  const ThresholdPolicy pol(2.3, MixerKind::Sigmoid, 5);
  const Matrix G = kernel_gradient(rules, pol);
  CHECK(G.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-15);

  const double d = 1e-5;
  const Matrix fd = (randomized_kernel(rules, ThresholdPolicy(2.3 + d, MixerKind::Sigmoid, 5)) -
                     randomized_kernel(rules, ThresholdPolicy(2.3 - d, MixerKind::Sigmoid, 5))) /
                    (2 * d);
  CHECK((G - fd).cwiseAbs().maxCoeff() <= 1e-8);

  MixedKernelRules same = rules;
  same.below_rule = same.above_rule;
  CHECK(kernel_gradient(same, pol).cwiseAbs().maxCoeff() == 0.0);

  const ThresholdPolicy kink(2.0, MixerKind::PiecewiseLinear, 5);
  CHECK_THROWS_AS(kernel_gradient(rules, kink), std::domain_error);
  CHECK_NOTHROW(kernel_gradient(rules, kink, OneSided::Right));
}

TEST_CASE("non-increasing differences") {
  const std::vector<double> good = {0, 1, 1.5, 1.6};
  const std::vector<double> bad = {0, 1, 3};
  CHECK(check_nonincreasing_differences(good).ok);
  const CheckResult r = check_nonincreasing_differences(bad);
  CHECK_FALSE(r.ok);
  REQUIRE(r.index.has_value());
  CHECK(*r.index == 0);
  CHECK(r.worst_slack == doctest::Approx(1.0));
  // Within slack.
  const std::vector<double> nearly = {0, 1, 2 + 5e-10};
  CHECK(check_nonincreasing_differences(nearly).ok);
}

TEST_CASE("monotone differences across iterations") {
  ViaTrace t;
  t.iterates = {Vector::Zero(3), Vector::Zero(3), Vector::Zero(3)};
  t.iterates[1] << 1, 1, 0;
  t.iterates[2] << 2, 1.5, 0.5;
  CHECK(check_monotone_across_iterations(t).ok);

  ViaTrace bad = t;
  bad.iterates[2] << 2, 1.5, 1.8;  // v_2(2) - v_2(1) = 0.3 > v_1(2) - v_1(1) = -1
  const CheckResult r = check_monotone_across_iterations(bad);
  CHECK_FALSE(r.ok);
  CHECK(r.iteration.value() == 1);
  CHECK(r.index.value() == 1);
}

TEST_CASE("unimodality") {
  const std::vector<double> up = {0, 0.5, 2.0 / 3.0};
  const CheckResult r = check_unimodal(up);
  CHECK(r.ok);
  CHECK(r.index.value() == 2);
  const std::vector<double> valley = {1, 0, 1};
  CHECK_FALSE(check_unimodal(valley).ok);
  const std::vector<double> plateau = {0, 1, 1, 1, 0.5};
  const CheckResult p = check_unimodal(plateau);
  CHECK(p.ok);
  CHECK(p.index.value() == 1);
  const std::vector<double> one = {4.0};
  CHECK(check_unimodal(one).ok);
}

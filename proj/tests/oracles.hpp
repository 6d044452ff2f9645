#pragma once

// Test-side oracles that share no code with the library solvers.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "structrl/mdp.hpp"

namespace oracle {

/// Stationary law of a birth-death (tridiagonal) chain by detailed balance:
/// pi(i+1) / pi(i) = P(i, i+1) / P(i+1, i).
inline std::vector<long double> birth_death_stationary(const structrl::Matrix& P) {
  const auto n = static_cast<std::size_t>(P.rows());
  std::vector<long double> pi(n, 0.0L);
  pi[0] = 1.0L;
  long double total = 1.0L;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto a = static_cast<Eigen::Index>(i);
    const long double down = P(a + 1, a);
    if (down <= 0.0L) throw std::invalid_argument("oracle needs positive down moves");
    pi[i + 1] = pi[i] * static_cast<long double>(P(a, a + 1)) / down;
    total += pi[i + 1];
  }
  for (auto& x : pi) x /= total;
  return pi;
}

/// Probability of A1 in state i for threshold T with the logistic mixer centred at T - 0.5.
inline long double logistic_a1(std::size_t i, long double T) {
  return 1.0L / (1.0L + std::exp(-(static_cast<long double>(i) - T + 0.5L)));
}

/// Average reward of the randomized threshold policy on the up/stay/down chain
/// with step-up probability p and reward r for A2; A2 is unavailable at N.
inline long double birth_death_sigma(std::size_t N, long double p, long double r, long double T) {
  std::vector<long double> pi(N + 1);
  std::vector<long double> a2(N + 1, 0.0L);
  for (std::size_t i = 0; i < N; ++i) a2[i] = 1.0L - logistic_a1(i, T);
  pi[0] = 1.0L;
  long double total = 1.0L;
  for (std::size_t i = 0; i < N; ++i) {
    pi[i + 1] = pi[i] * p * a2[i] / (1.0L - p);
    total += pi[i + 1];
  }
  long double s = 0.0L;
  for (std::size_t i = 0; i <= N; ++i) s += pi[i] / total * a2[i] * r;
  return s;
}

/// Deterministic threshold version: A2 exactly on i < T.
inline long double birth_death_sigma_det(std::size_t N, long double p, long double r, std::size_t T) {
  std::vector<long double> pi(N + 1);
  pi[0] = 1.0L;
  long double total = 1.0L;
  for (std::size_t i = 0; i < N; ++i) {
    pi[i + 1] = i < T ? pi[i] * p / (1.0L - p) : 0.0L;
    total += pi[i + 1];
  }
  long double s = 0.0L;
  for (std::size_t i = 0; i < std::min(T, N); ++i) s += pi[i] / total * r;
  return s;
}

}  // namespace oracle

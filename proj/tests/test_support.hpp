#pragma once

// Test-only oracles, independent of the implementation paths they check.

#include <cmath>
#include <functional>
#include <vector>

#include "preflab/core.hpp"
#include "preflab/rng.hpp"

namespace preflab::testing {

/// Central finite differences of a scalar function of a logit table.
inline std::vector<std::vector<double>> finite_difference_gradient(
    const std::function<double(const std::vector<std::vector<double>>&)>& f,
    std::vector<std::vector<double>> at, double step = 1e-5) {
  std::vector<std::vector<double>> grad(at.size());
  for (std::size_t x = 0; x < at.size(); ++x) {
    grad[x].assign(at[x].size(), 0.0);
    for (std::size_t y = 0; y < at[x].size(); ++y) {
      const double keep = at[x][y];
      at[x][y] = keep + step;
      const double up = f(at);
      at[x][y] = keep - step;
      const double down = f(at);
      at[x][y] = keep;
      grad[x][y] = (up - down) / (2.0 * step);
    }
  }
  return grad;
}

/// Relative error between gradients, measured on the stacked vectors.
inline double gradient_relative_error(
    const std::vector<std::vector<double>>& a,
    const std::vector<std::vector<double>>& b) {
  double diff2 = 0.0, na2 = 0.0, nb2 = 0.0;
  for (std::size_t x = 0; x < a.size(); ++x)
    for (std::size_t y = 0; y < a[x].size(); ++y) {
      const double d = a[x][y] - b[x][y];
      diff2 += d * d;
      na2 += a[x][y] * a[x][y];
      nb2 += b[x][y] * b[x][y];
    }
  const double denom = std::max({std::sqrt(na2), std::sqrt(nb2), 1e-12});
  return std::sqrt(diff2) / denom;
}

/// O(n^2) dominance oracle for the Pareto front (minimize kl, maximize reward).
inline std::vector<std::size_t> brute_force_front(
    const std::vector<ExperimentPoint>& points) {
  std::vector<std::size_t> front;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
      if (j == i) continue;
      const bool no_worse = points[j].kl <= points[i].kl &&
                            points[j].reward >= points[i].reward;
      const bool strict = points[j].kl < points[i].kl ||
                          points[j].reward > points[i].reward;
      dominated = no_worse && strict;
    }
    if (!dominated) front.push_back(i);
  }
  return front;
}

}  // namespace preflab::testing

#pragma once

#include <cstddef>
#include <variant>

#include "smrd/core.hpp"

namespace smrd {

// Geometric noise levels beta_0 > ... > beta_{L-1}, each held for `steps_per_level` steps.
struct NoiseSchedule {
  int levels = 30;
  double beta_max = 1.0;
  double beta_min = 0.01;
  int steps_per_level = 10;
  double eps0 = 2e-5;

  void validate() const;
  int total_steps() const { return levels * steps_per_level; }
  int level(int t) const;
  double beta_at_level(int level) const;
  double beta(int t) const { return beta_at_level(level(t)); }
};

// Step size eps0 * beta_{l(t)}^2 / beta_{L-1}^2.
double eta(const NoiseSchedule& schedule, int t);

// Score of N(mean, tau2 I) convolved with N(0, beta^2 I).
struct GaussianPrior {
  ComplexImage mean;
  double tau2 = 1.0;
};

// Improper Gaussian prior exp(-gamma/2 * |grad x|^2); score is -gamma * L x with L the graph Laplacian.
struct SmoothnessPrior {
  double gamma = 0.0;
};

struct ZeroPrior {};

struct ScorePrior {
  std::variant<GaussianPrior, SmoothnessPrior, ZeroPrior> model;
  NoiseSchedule schedule;

  void validate() const;
  const char* kind_name() const;
};

ScorePrior make_gaussian_prior(ComplexImage mean, double tau2, NoiseSchedule schedule);
ScorePrior make_smoothness_prior(double gamma, NoiseSchedule schedule);
ScorePrior make_zero_prior(NoiseSchedule schedule);

// Approximates grad log p_t(x) for step t.
ComplexImage score(const ScorePrior& prior, const ComplexImage& x, int t);

// Positive semidefinite 5-point graph Laplacian (4x minus the neighbours) with replicated
// borders, so constants map to zero.
ComplexImage graph_laplacian(const ComplexImage& x);

}  // namespace smrd

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "smrd/core.hpp"
#include "smrd/random.hpp"

namespace smrd {

// Monte-Carlo SURE settings. The perturbation scale is relative to the largest
// magnitude of the perturbed input and never drops below the floor.
struct SureConfig {
  double relative_epsilon = 1e-3;
  double epsilon_floor = 1e-8;
  int probes = 1;

  void validate() const;
};

// Test-time tuning of the regularization weight with an adaptive-moment optimizer.
struct TttConfig {
  double lambda0 = 2.0;
  double alpha = 0.2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double freeze_fraction = 0.43;
  double lambda_min = 1e-4;
  double lambda_max = 1e4;

  void validate() const;
  // First step index at which lambda stays fixed.
  int freeze_step(int total_steps) const;
};

struct EarlyStopConfig {
  int window = 0;  // 0 selects ceil(0.14 * T)

  int resolved_window(int total_steps) const;
};

struct TttState {
  double lambda = 2.0;
  double first_moment = 0.0;
  double second_moment = 0.0;
  int optimizer_steps = 0;
  std::vector<double> sure_history;
  bool stopped = false;
  int t_es = 0;

  static TttState initial(const TttConfig& cfg);
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Maps the estimator input (the zero-filled image) to its output.
using UpdateEvaluator = std::function<ComplexImage(const ComplexImage&)>;

double perturbation_scale(const SureConfig& cfg, const ComplexImage& input);

// Probes with E|mu_i|^2 = 1 (real and imaginary parts each N(0, 1/2)).
std::vector<ComplexImage> draw_probes(Eigen::Index height, Eigen::Index width, int count, Rng& rng);

// mean_k Re<mu_k, h(input + eps mu_k) - h(input)> / eps, an estimate of tr(dh/dinput).
double mc_divergence(const UpdateEvaluator& h, const ComplexImage& input, const ComplexImage& base_output,
                     double epsilon, std::span<const ComplexImage> probes);

// |h(input) - x_zf|^2 / (N eps) * Re<mu, h(input + eps mu) - h(input)>, averaged over probes.
double mc_sure(const UpdateEvaluator& h, const ComplexImage& input, const ComplexImage& x_zf, double epsilon,
               std::span<const ComplexImage> probes, const ComplexImage* base_output = nullptr);
double mc_sure(const UpdateEvaluator& h, const ComplexImage& input, const ComplexImage& x_zf, const SureConfig& cfg,
               Rng& rng);

// |x_hat - x_zf|^2 - N sigma^2 + sigma^2 * divergence.
double sure_known_sigma(const ComplexImage& x_hat, const ComplexImage& x_zf, double sigma, double divergence);

// h evaluated at a given regularization weight.
using LambdaEvaluator = std::function<ComplexImage(double lambda, const ComplexImage& input)>;

// Finite-difference d SURE / d lambda sharing one set of probes across every evaluation.
// Falls back to a one-sided difference near the lambda bounds.
double grad_sure_lambda(const LambdaEvaluator& h, const ComplexImage& input, const ComplexImage& x_zf, double lambda,
                        double epsilon, std::span<const ComplexImage> probes, const TttConfig& bounds);
double grad_sure_lambda(const LambdaEvaluator& h, const ComplexImage& input, const ComplexImage& x_zf, double lambda,
                        const SureConfig& cfg, Rng& rng, const TttConfig& bounds);

// One optimizer step on lambda (clamped); a no-op from the freeze step on.
TttState update_lambda(TttState state, double grad, const TttConfig& cfg, int t, int total_steps);

// True iff history holds at least 2w values and the mean of the last w exceeds the mean of the w before.
bool early_stop_check(std::span<const double> history, int window);

}  // namespace smrd

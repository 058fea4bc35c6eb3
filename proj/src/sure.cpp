#include "smrd/sure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace smrd {

void SureConfig::validate() const {
  if (!(relative_epsilon > 0.0)) throw std::invalid_argument("relative epsilon must be positive");
  if (!(epsilon_floor > 0.0)) throw std::invalid_argument("epsilon floor must be positive");
  if (probes < 1) throw std::invalid_argument("need at least one probe");
}

void TttConfig::validate() const {
  if (!(lambda_min > 0.0) || !(lambda_max > lambda_min)) throw std::invalid_argument("invalid lambda bounds");
  if (!(lambda0 >= lambda_min && lambda0 <= lambda_max)) throw std::invalid_argument("lambda0 outside bounds");
  if (!(alpha > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(freeze_fraction > 0.0 && freeze_fraction <= 1.0)) throw std::invalid_argument("freeze fraction must lie in (0, 1]");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("invalid moment decay");
}

int TttConfig::freeze_step(int total_steps) const {
  return static_cast<int>(std::ceil(freeze_fraction * static_cast<double>(total_steps) - 1e-9));
}

int EarlyStopConfig::resolved_window(int total_steps) const {
  if (window > 0) return window;
  return std::max(1, static_cast<int>(std::ceil(0.14 * static_cast<double>(total_steps) - 1e-9)));
}

TttState TttState::initial(const TttConfig& cfg) {
  TttState s;
  s.lambda = cfg.lambda0;
  return s;
}

double perturbation_scale(const SureConfig& cfg, const ComplexImage& input) {
  const double peak = input.size() > 0 ? input.cwiseAbs().maxCoeff() : 0.0;
  const double eps = std::max(cfg.relative_epsilon * peak, cfg.epsilon_floor);
  if (!(eps > 0.0) || !std::isfinite(eps)) throw NumericalError("SURE perturbation scale underflow");
  return eps;
}

std::vector<ComplexImage> draw_probes(Eigen::Index height, Eigen::Index width, int count, Rng& rng) {
  std::vector<ComplexImage> probes;
  probes.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) probes.push_back(complex_gaussian(height, width, rng, std::sqrt(0.5)));
  return probes;
}

double mc_divergence(const UpdateEvaluator& h, const ComplexImage& input, const ComplexImage& base_output,
                     double epsilon, std::span<const ComplexImage> probes) {
  if (!(epsilon > 0.0)) throw NumericalError("SURE perturbation scale underflow");
  if (probes.empty()) throw std::invalid_argument("need at least one probe");
  double acc = 0.0;
  for (const auto& mu : probes) {
    const ComplexImage perturbed = h(input + epsilon * mu);
    acc += inner(mu, perturbed - base_output).real() / epsilon;
  }
  return acc / static_cast<double>(probes.size());
}

double mc_sure(const UpdateEvaluator& h, const ComplexImage& input, const ComplexImage& x_zf, double epsilon,
               std::span<const ComplexImage> probes, const ComplexImage* base_output) {
  const ComplexImage base = base_output != nullptr ? *base_output : h(input);
  require_same_shape(base, x_zf, "mc_sure");
  const auto n = static_cast<double>(base.size());
  const double residual = (base - x_zf).squaredNorm();
  const double value = residual / n * mc_divergence(h, input, base, epsilon, probes);
  if (!std::isfinite(value)) throw NumericalError("SURE evaluated to a non-finite value");
  return value;
}

double mc_sure(const UpdateEvaluator& h, const ComplexImage& input, const ComplexImage& x_zf, const SureConfig& cfg,
               Rng& rng) {
  cfg.validate();
  const auto probes = draw_probes(input.rows(), input.cols(), cfg.probes, rng);
  return mc_sure(h, input, x_zf, perturbation_scale(cfg, input), probes);
}

double sure_known_sigma(const ComplexImage& x_hat, const ComplexImage& x_zf, double sigma, double divergence) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be nonnegative");
  require_same_shape(x_hat, x_zf, "sure_known_sigma");
  const auto n = static_cast<double>(x_hat.size());
  const double s2 = sigma * sigma;
  return (x_hat - x_zf).squaredNorm() - n * s2 + s2 * divergence;
}

double grad_sure_lambda(const LambdaEvaluator& h, const ComplexImage& input, const ComplexImage& x_zf, double lambda,
                        double epsilon, std::span<const ComplexImage> probes, const TttConfig& bounds) {
  const double delta = std::max(1e-4, 1e-2 * lambda);
  auto sure_at = [&](double l) {
    const UpdateEvaluator at = [&](const ComplexImage& v) { return h(l, v); };
    return mc_sure(at, input, x_zf, epsilon, probes);
  };
  const bool can_go_up = lambda + delta <= bounds.lambda_max;
  const bool can_go_down = lambda - delta >= bounds.lambda_min;
  if (can_go_up && can_go_down) return (sure_at(lambda + delta) - sure_at(lambda - delta)) / (2.0 * delta);
  if (can_go_up) return (sure_at(lambda + delta) - sure_at(lambda)) / delta;
  if (can_go_down) return (sure_at(lambda) - sure_at(lambda - delta)) / delta;
  return 0.0;
}

double grad_sure_lambda(const LambdaEvaluator& h, const ComplexImage& input, const ComplexImage& x_zf, double lambda,
                        const SureConfig& cfg, Rng& rng, const TttConfig& bounds) {
  cfg.validate();
  const auto probes = draw_probes(input.rows(), input.cols(), cfg.probes, rng);
  return grad_sure_lambda(h, input, x_zf, lambda, perturbation_scale(cfg, input), probes, bounds);
}

TttState update_lambda(TttState state, double grad, const TttConfig& cfg, int t, int total_steps) {
  if (t >= cfg.freeze_step(total_steps)) return state;
  if (!std::isfinite(grad)) throw NumericalError("non-finite SURE gradient");
  state.optimizer_steps += 1;
  const double k = static_cast<double>(state.optimizer_steps);
  state.first_moment = cfg.beta1 * state.first_moment + (1.0 - cfg.beta1) * grad;
  state.second_moment = cfg.beta2 * state.second_moment + (1.0 - cfg.beta2) * grad * grad;
  const double m_hat = state.first_moment / (1.0 - std::pow(cfg.beta1, k));
  const double v_hat = state.second_moment / (1.0 - std::pow(cfg.beta2, k));
  state.lambda -= cfg.alpha * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
  state.lambda = std::clamp(state.lambda, cfg.lambda_min, cfg.lambda_max);
  return state;
}

bool early_stop_check(std::span<const double> history, int window) {
  if (window < 1) throw std::invalid_argument("early-stop window must be positive");
  const auto w = static_cast<std::size_t>(window);
  if (history.size() < 2 * w) return false;
  const auto end = history.end();
  const double recent = std::accumulate(end - static_cast<std::ptrdiff_t>(w), end, 0.0) / static_cast<double>(w);
  const double before = std::accumulate(end - static_cast<std::ptrdiff_t>(2 * w), end - static_cast<std::ptrdiff_t>(w), 0.0) /
                        static_cast<double>(w);
  return recent > before;
}

}  // namespace smrd

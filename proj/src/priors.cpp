#include "smrd/priors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace smrd {

void NoiseSchedule::validate() const {
  if (levels < 1 || steps_per_level < 1) throw std::invalid_argument("schedule needs at least one level and step");
  if (!(beta_min > 0.0) || !(beta_max > 0.0)) throw std::invalid_argument("noise levels must be positive");
  if (levels > 1 && !(beta_max > beta_min)) throw std::invalid_argument("beta_max must exceed beta_min");
  if (!(eps0 > 0.0)) throw std::invalid_argument("eps0 must be positive");
}

int NoiseSchedule::level(int t) const {
  if (t < 0 || t >= total_steps())
    throw std::out_of_range("step " + std::to_string(t) + " outside schedule of " + std::to_string(total_steps()));
  return t / steps_per_level;
}

double NoiseSchedule::beta_at_level(int l) const {
  if (levels == 1) return beta_min;
  return beta_max * std::pow(beta_min / beta_max, static_cast<double>(l) / static_cast<double>(levels - 1));
}

double eta(const NoiseSchedule& schedule, int t) {
  const double ratio = schedule.beta(t) / schedule.beta_at_level(schedule.levels - 1);
  return schedule.eps0 * ratio * ratio;
}

void ScorePrior::validate() const {
  schedule.validate();
  if (const auto* g = std::get_if<GaussianPrior>(&model)) {
    if (!(g->tau2 > 0.0)) throw std::invalid_argument("gaussian prior needs tau2 > 0");
  } else if (const auto* s = std::get_if<SmoothnessPrior>(&model)) {
    if (!(s->gamma >= 0.0)) throw std::invalid_argument("smoothness prior needs gamma >= 0");
  }
}

const char* ScorePrior::kind_name() const {
  switch (model.index()) {
    case 0: return "gaussian";
    case 1: return "smoothness";
    default: return "zero";
  }
}

ScorePrior make_gaussian_prior(ComplexImage mean, double tau2, NoiseSchedule schedule) {
  ScorePrior p{GaussianPrior{std::move(mean), tau2}, schedule};
  p.validate();
  return p;
}

ScorePrior make_smoothness_prior(double gamma, NoiseSchedule schedule) {
  ScorePrior p{SmoothnessPrior{gamma}, schedule};
  p.validate();
  return p;
}

ScorePrior make_zero_prior(NoiseSchedule schedule) {
  ScorePrior p{ZeroPrior{}, schedule};
  p.validate();
  return p;
}

ComplexImage graph_laplacian(const ComplexImage& x) {
  const Eigen::Index h = x.rows();
  const Eigen::Index w = x.cols();
  ComplexImage out(h, w);
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) {
      const Complex center = x(r, c);
      const Complex up = x(r > 0 ? r - 1 : r, c);
      const Complex down = x(r + 1 < h ? r + 1 : r, c);
      const Complex left = x(r, c > 0 ? c - 1 : c);
      const Complex right = x(r, c + 1 < w ? c + 1 : c);
      out(r, c) = 4.0 * center - (up + down + left + right);
    }
  }
  return out;
}

ComplexImage score(const ScorePrior& prior, const ComplexImage& x, int t) {
  const int level = prior.schedule.level(t);
  if (const auto* g = std::get_if<GaussianPrior>(&prior.model)) {
    require_same_shape(x, g->mean, "gaussian score");
    const double beta = prior.schedule.beta_at_level(level);
    return (g->mean - x) / (g->tau2 + beta * beta);
  }
  if (const auto* s = std::get_if<SmoothnessPrior>(&prior.model)) {
    return -s->gamma * graph_laplacian(x);
  }
  return ComplexImage::Zero(x.rows(), x.cols());
}

}  // namespace smrd

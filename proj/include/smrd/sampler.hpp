#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smrd/core.hpp"
#include "smrd/forward_model.hpp"
#include "smrd/priors.hpp"
#include "smrd/random.hpp"
#include "smrd/sure.hpp"

namespace smrd {

enum class Method { smrd, am_fixed, csgm, csgm_es, zero_filled };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);
inline constexpr Method all_methods[] = {Method::zero_filled, Method::csgm, Method::csgm_es, Method::am_fixed,
                                         Method::smrd};

struct SamplerConfig {
  int total_steps = 300;
  int cg_iters = 5;
  std::uint64_t seed = 0;
  Method method = Method::smrd;
  double dc_weight = 1.0;  // csgm data-consistency weight

  void validate() const;
};

struct TraceRow {
  int t = 0;
  double sure = 0.0;
  double lambda = 0.0;
  std::optional<double> mse;
  std::optional<double> psnr;
};

struct ReconReport {
  ComplexImage final_image;
  int t_es = 0;
  double final_lambda = 0.0;
  Method method = Method::smrd;
  std::vector<TraceRow> trace;
};

// x + eta * score + sqrt(2 eta) * zeta
ComplexImage langevin_update(const ComplexImage& x, const ComplexImage& score_value, double step,
                             const ComplexImage& zeta);
ComplexImage langevin_step(const ComplexImage& x, const ScorePrior& prior, int t, const ComplexImage& zeta);
// Draws zeta with N(0, 1) real and imaginary parts from rng.
ComplexImage langevin_step(const ComplexImage& x, const ScorePrior& prior, int t, Rng& rng);

struct CgResult {
  ComplexImage solution;
  std::vector<double> residual_norms;  // ||b - M z_k||, k = 0..iterations
};

// Conjugate gradient on a Hermitian positive definite operator, starting from x0.
template <typename Operator>
CgResult conjugate_gradient(const Operator& apply, const ComplexImage& b, const ComplexImage& x0, int iters) {
  CgResult out{x0, {}};
  ComplexImage r = b - apply(x0);
  ComplexImage p = r;
  double rs = r.squaredNorm();
  out.residual_norms.push_back(std::sqrt(rs));
  for (int k = 0; k < iters; ++k) {
    if (rs == 0.0) {
      out.residual_norms.push_back(0.0);
      continue;
    }
    const ComplexImage ap = apply(p);
    const double curvature = inner(p, ap).real();
    if (!(curvature > 0.0)) throw NumericalError("conjugate gradient lost positive definiteness");
    const double step = rs / curvature;
    out.solution += step * p;
    r -= step * ap;
    const double rs_next = r.squaredNorm();
    p = r + (rs_next / rs) * p;
    rs = rs_next;
    out.residual_norms.push_back(std::sqrt(rs));
  }
  return out;
}

// Solves (A^H A + lambda I) z = x_zf + lambda x_plus with `iters` CG steps from z0 = x_plus.
CgResult cg_solve_traced(const ForwardModel& fm, double lambda, const ComplexImage& x_zf, const ComplexImage& x_plus,
                         int iters);
ComplexImage cg_solve(const ForwardModel& fm, double lambda, const ComplexImage& x_zf, const ComplexImage& x_plus,
                      int iters);

// Data-consistency half of the alternating minimization: zero-fill y, then cg_solve.
ComplexImage am_update(const ForwardModel& fm, const CoilStack& y, const ComplexImage& x_plus, double lambda,
                       int cg_iters);

// One posterior-score Langevin step with grad log p(x|y) ~ score + dc_weight * A^H (y - A x).
ComplexImage csgm_update(const ForwardModel& fm, const ComplexImage& x, const ComplexImage& x_zf,
                         const ComplexImage& score_value, double step, double dc_weight, const ComplexImage& zeta);
ComplexImage csgm_step(const ComplexImage& x, const ScorePrior& prior, const ForwardModel& fm, const CoilStack& y,
                       int t, Rng& rng, double dc_weight);

struct ReconInputs {
  const CoilStack& y;
  const ForwardModel& fm;
  const ScorePrior& prior;
  const ComplexImage* ground_truth = nullptr;
};

struct ReconSettings {
  SamplerConfig sampler;
  TttConfig ttt;
  EarlyStopConfig early_stop;
  SureConfig sure;
};

// Runs the selected method; for smrd this is Langevin -> CG update -> MC-SURE -> lambda step -> early-stop check.
ReconReport run_reconstruction(const ReconInputs& inputs, const ReconSettings& settings);

}  // namespace smrd

#include "smrd/sampler.hpp"

#include <cmath>
#include <stdexcept>

#include "smrd/metrics.hpp"

namespace smrd {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::smrd: return "smrd";
    case Method::am_fixed: return "am_fixed";
    case Method::csgm: return "csgm";
    case Method::csgm_es: return "csgm_es";
    case Method::zero_filled: return "zero_filled";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : all_methods) {
    if (method_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

void SamplerConfig::validate() const {
  if (total_steps < 1) throw std::invalid_argument("total steps must be >= 1");
  if (cg_iters < 1) throw std::invalid_argument("cg_iters must be >= 1");
  if (!(dc_weight >= 0.0)) throw std::invalid_argument("dc_weight must be nonnegative");
}

ComplexImage langevin_update(const ComplexImage& x, const ComplexImage& score_value, double step,
                             const ComplexImage& zeta) {
  require_same_shape(x, score_value, "langevin_update");
  require_same_shape(x, zeta, "langevin_update");
  return x + step * score_value + std::sqrt(2.0 * step) * zeta;
}

ComplexImage langevin_step(const ComplexImage& x, const ScorePrior& prior, int t, const ComplexImage& zeta) {
  return langevin_update(x, score(prior, x, t), eta(prior.schedule, t), zeta);
}

ComplexImage langevin_step(const ComplexImage& x, const ScorePrior& prior, int t, Rng& rng) {
  const ComplexImage zeta = complex_gaussian(x.rows(), x.cols(), rng);
  return langevin_step(x, prior, t, zeta);
}

CgResult cg_solve_traced(const ForwardModel& fm, double lambda, const ComplexImage& x_zf, const ComplexImage& x_plus,
                         int iters) {
  if (!(lambda > 0.0)) throw std::invalid_argument("cg_solve needs lambda > 0");
  if (iters < 1) throw std::invalid_argument("cg_solve needs at least one iteration");
  require_same_shape(x_zf, x_plus, "cg_solve");
  const auto op = [&](const ComplexImage& v) -> ComplexImage { return fm.normal(v) + lambda * v; };
  const ComplexImage rhs = x_zf + lambda * x_plus;
  return conjugate_gradient(op, rhs, x_plus, iters);
}

ComplexImage cg_solve(const ForwardModel& fm, double lambda, const ComplexImage& x_zf, const ComplexImage& x_plus,
                      int iters) {
  return cg_solve_traced(fm, lambda, x_zf, x_plus, iters).solution;
}

ComplexImage am_update(const ForwardModel& fm, const CoilStack& y, const ComplexImage& x_plus, double lambda,
                       int cg_iters) {
  return cg_solve(fm, lambda, fm.adjoint(y), x_plus, cg_iters);
}

ComplexImage csgm_update(const ForwardModel& fm, const ComplexImage& x, const ComplexImage& x_zf,
                         const ComplexImage& score_value, double step, double dc_weight, const ComplexImage& zeta) {
  // A^H (y - A x) = x_zf - A^H A x
  const ComplexImage data_grad = x_zf - fm.normal(x);
  return langevin_update(x, score_value + dc_weight * data_grad, step, zeta);
}

ComplexImage csgm_step(const ComplexImage& x, const ScorePrior& prior, const ForwardModel& fm, const CoilStack& y,
                       int t, Rng& rng, double dc_weight) {
  const ComplexImage zeta = complex_gaussian(x.rows(), x.cols(), rng);
  return csgm_update(fm, x, fm.adjoint(y), score(prior, x, t), eta(prior.schedule, t), dc_weight, zeta);
}

ReconReport run_reconstruction(const ReconInputs& inputs, const ReconSettings& settings) {
  const auto& cfg = settings.sampler;
  cfg.validate();
  settings.ttt.validate();
  settings.sure.validate();
  inputs.prior.validate();
  const ForwardModel& fm = inputs.fm;
  const int total = cfg.total_steps;
  if (total > inputs.prior.schedule.total_steps())
    throw std::invalid_argument("sampler runs more steps than the noise schedule provides");
  if (inputs.ground_truth != nullptr) require_same_shape(*inputs.ground_truth, fm.sens().maps[0], "ground truth");

  ReconReport report;
  report.method = cfg.method;
  const ComplexImage x_zf = fm.adjoint(inputs.y);
  if (cfg.method == Method::zero_filled) {
    report.final_image = x_zf;
    report.t_es = 0;
    return report;
  }

  const Eigen::Index h = fm.height();
  const Eigen::Index w = fm.width();
  Rng init_rng = make_rng(cfg.seed, "init");
  Rng langevin_rng = make_rng(cfg.seed, "langevin");
  Rng probe_rng = make_rng(cfg.seed, "probe");

  const bool proximal = cfg.method == Method::smrd || cfg.method == Method::am_fixed;
  const bool tune = cfg.method == Method::smrd;
  const bool stop_early = cfg.method == Method::smrd || cfg.method == Method::csgm_es;
  const int window = settings.early_stop.resolved_window(total);
  const int freeze = settings.ttt.freeze_step(total);

  TttState state = TttState::initial(settings.ttt);
  ComplexImage x = complex_gaussian(h, w, init_rng);
  report.t_es = total;

  for (int t = 0; t < total; ++t) {
    const ComplexImage zeta = complex_gaussian(h, w, langevin_rng);
    const double step = eta(inputs.prior.schedule, t);
    const ComplexImage score_value = score(inputs.prior, x, t);
    const double lambda = state.lambda;

    ComplexImage x_plus;
    LambdaEvaluator update;
    if (proximal) {
      x_plus = langevin_update(x, score_value, step, zeta);
      update = [&](double l, const ComplexImage& zf) { return cg_solve(fm, l, zf, x_plus, cfg.cg_iters); };
    } else {
      update = [&](double, const ComplexImage& zf) {
        return csgm_update(fm, x, zf, score_value, step, cfg.dc_weight, zeta);
      };
    }
    const UpdateEvaluator at_lambda = [&](const ComplexImage& zf) { return update(lambda, zf); };
    ComplexImage next = at_lambda(x_zf);
    if (!all_finite(next)) throw NumericalError("iterate became non-finite at step " + std::to_string(t));

    const auto probes = draw_probes(h, w, settings.sure.probes, probe_rng);
    const double epsilon = perturbation_scale(settings.sure, x_zf);
    const double sure_value = mc_sure(at_lambda, x_zf, x_zf, epsilon, probes, &next);

    TraceRow row{t, sure_value, proximal ? lambda : 0.0, std::nullopt, std::nullopt};
    if (inputs.ground_truth != nullptr) {
      row.mse = (next - *inputs.ground_truth).squaredNorm() / static_cast<double>(next.size());
      row.psnr = psnr(*inputs.ground_truth, next);
    }
    report.trace.push_back(row);

    if (tune && t < freeze) {
      const double grad = grad_sure_lambda(update, x_zf, x_zf, lambda, epsilon, probes, settings.ttt);
      state = update_lambda(std::move(state), grad, settings.ttt, t, total);
    }
    state.sure_history.push_back(sure_value);
    x = std::move(next);

    if (stop_early && early_stop_check(state.sure_history, window)) {
      state.stopped = true;
      state.t_es = t + 1;
      report.t_es = t + 1;
      break;
    }
  }
  report.final_image = std::move(x);
  report.final_lambda = proximal ? state.lambda : 0.0;
  return report;
}

}  // namespace smrd

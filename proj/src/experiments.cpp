#include "smrd/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "smrd/data.hpp"

namespace smrd {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

void save(const fs::path& path, const Tensor& t) {
  try {
    save_tensor(path, t);
  } catch (const TensorFormatError& e) {
    throw IoError(e.what());
  }
}

Tensor load(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("missing input " + path.string());
  try {
    return load_tensor(path);
  } catch (const TensorFormatError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

SamplingMask build_mask(const ExperimentConfig& cfg) {
  const Eigen::Index n = cfg.phantom.size;
  const std::uint64_t seed = derive_seed(cfg.seed, "mask");
  if (cfg.mask == MaskKind::equispaced) return make_equispaced_mask(n, n, cfg.accel, cfg.resolved_acs(), seed);
  return make_poisson_disc_mask(n, n, cfg.accel, cfg.calib, seed);
}

ExperimentConfig with_sampler_seed(ExperimentConfig cfg) {
  cfg.sampler.seed = derive_seed(cfg.seed, "sampler");
  return cfg;
}

std::string metrics_text(const ReconOutcome& o) {
  std::string text;
  text += "method=" + std::string(method_name(o.report.method)) + "\n";
  if (o.metrics) {
    text += "psnr=" + format_double(o.metrics->psnr) + "\n";
    text += "ssim=" + format_double(o.metrics->ssim) + "\n";
  }
  text += "t_es=" + std::to_string(o.report.t_es) + "\n";
  text += "final_lambda=" + format_double(o.report.final_lambda) + "\n";
  text += "steps_executed=" + std::to_string(o.report.trace.size()) + "\n";
  return text;
}

// Loads the files written by cmd_simulate and checks them against cfg.
Simulation load_simulation(const ExperimentConfig& cfg, bool need_truth) {
  const fs::path dir = cfg.out;
  Simulation sim;
  if (need_truth && !fs::exists(dir / "truth.smrd"))
    throw IoError("ground truth " + (dir / "truth.smrd").string() + " is required");
  if (fs::exists(dir / "truth.smrd")) sim.truth = image_from_tensor(load(dir / "truth.smrd"));
  sim.coils.maps = stack_from_tensor(load(dir / "coils.smrd"));
  sim.kspace = stack_from_tensor(load(dir / "kspace.smrd"));
  sim.prior_mean = image_from_tensor(load(dir / "prior_mean.smrd"));
  const MaskArray keep = mask_from_tensor(load(dir / "mask.smrd"));
  sim.mask = SamplingMask(keep, cfg.accel);

  const Eigen::Index n = cfg.phantom.size;
  if (keep.rows() != n || keep.cols() != n || sim.coils.height() != n || sim.coils.coils() != cfg.coils ||
      sim.kspace.coils() != cfg.coils)
    throw ConfigError("simulated data in " + dir.string() + " does not match the configuration (size/coils)");
  return sim;
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Simulation simulate(const ExperimentConfig& cfg) {
  cfg.validate();
  Simulation sim;
  const Eigen::Index n = cfg.phantom.size;
  sim.truth = make_phantom(cfg.phantom, derive_seed(cfg.seed, "phantom"));
  sim.coils = make_synth_coils(n, n, cfg.coils, derive_seed(cfg.seed, "coils"));
  sim.mask = build_mask(cfg);
  const ForwardModel fm(sim.coils, sim.mask);
  sim.noise_std = cfg.sigma;
  sim.kspace = add_kspace_noise(fm.forward(sim.truth), sim.mask, {cfg.sigma, derive_seed(cfg.seed, "noise")});
  if (cfg.density_comp) sim.kspace = density_compensate(sim.kspace, sim.mask);
  if (cfg.prior_mean == PriorMean::template_phantom)
    sim.prior_mean = make_phantom_template(cfg.phantom, cfg.jitter, derive_seed(cfg.seed, "phantom"),
                                           derive_seed(cfg.seed, "template"));
  else
    sim.prior_mean = ComplexImage::Zero(n, n);
  return sim;
}

ScorePrior build_prior(const ExperimentConfig& cfg, const ComplexImage& prior_mean) {
  switch (cfg.prior) {
    case PriorKind::gaussian:
      return make_gaussian_prior(prior_mean, cfg.tau2, cfg.schedule);
    case PriorKind::smoothness:
      return make_smoothness_prior(cfg.gamma, cfg.schedule);
    case PriorKind::zero:
      break;
  }
  return make_zero_prior(cfg.schedule);
}

ReconOutcome reconstruct(const ExperimentConfig& cfg, const Simulation& sim, const ComplexImage* truth) {
  const ExperimentConfig run = with_sampler_seed(cfg);
  run.validate();
  const ForwardModel fm(sim.coils, sim.mask);
  const ScorePrior prior = build_prior(run, sim.prior_mean);
  ReconOutcome out;
  out.report = run_reconstruction({sim.kspace, fm, prior, truth}, run.recon_settings());
  if (truth != nullptr) out.metrics = evaluate(*truth, out.report.final_image);
  return out;
}

std::string trace_csv(const ReconReport& report) {
  std::string text = "t,sure,lambda,mse,psnr\n";
  for (const auto& row : report.trace) {
    text += std::to_string(row.t) + "," + format_double(row.sure) + "," + format_double(row.lambda) + ",";
    text += (row.mse ? format_double(*row.mse) : std::string()) + ",";
    text += (row.psnr ? format_double(*row.psnr) : std::string()) + "\n";
  }
  return text;
}

void cmd_simulate(const ExperimentConfig& cfg) {
  const Simulation sim = simulate(cfg);
  const fs::path dir = cfg.out;
  ensure_dir(dir);
  save(dir / "truth.smrd", to_tensor(sim.truth));
  save(dir / "coils.smrd", to_tensor(sim.coils.maps));
  save(dir / "mask.smrd", to_tensor(sim.mask));
  save(dir / "kspace.smrd", to_tensor(sim.kspace));
  save(dir / "prior_mean.smrd", to_tensor(sim.prior_mean));
  std::string manifest;
  manifest += "size=" + std::to_string(cfg.phantom.size) + "\n";
  manifest += "coils=" + std::to_string(cfg.coils) + "\n";
  manifest += "declared_R=" + format_double(cfg.accel) + "\n";
  manifest += "realized_R=" + format_double(sim.mask.realized_accel()) + "\n";
  manifest += "kept=" + std::to_string(sim.mask.kept_count()) + "\n";
  manifest += "noise_std=" + format_double(sim.noise_std) + "\n";
  manifest += "seed=" + std::to_string(cfg.seed) + "\n";
  write_text(dir / "manifest.txt", manifest);
  write_text(dir / "config.txt", serialize_config(cfg));
}

ReconOutcome cmd_recon(const ExperimentConfig& cfg) {
  cfg.validate();
  const Simulation sim = load_simulation(cfg, false);
  const bool has_truth = sim.truth.size() > 0;
  ReconOutcome out = reconstruct(cfg, sim, has_truth ? &sim.truth : nullptr);
  const fs::path dir = cfg.out;
  const std::string tag(method_name(cfg.sampler.method));
  save(dir / ("recon_" + tag + ".smrd"), to_tensor(out.report.final_image));
  write_text(dir / ("trace_" + tag + ".csv"), trace_csv(out.report));
  write_text(dir / ("metrics_" + tag + ".txt"), metrics_text(out));
  return out;
}

std::vector<SweepRow> cmd_sweep_lambda(const ExperimentConfig& cfg, const std::vector<double>& lambdas,
                                       const std::vector<double>& sigmas) {
  if (lambdas.empty() || sigmas.empty()) throw ConfigError("sweep grid must be nonempty");
  for (double l : lambdas) {
    if (!(l > 0.0)) throw ConfigError("sweep lambdas must be positive");
  }
  std::vector<SweepRow> rows;
  for (double sigma : sigmas) {
    ExperimentConfig point = cfg;
    point.sigma = sigma;
    point.sampler.method = Method::am_fixed;
    const Simulation sim = simulate(point);
    for (double lambda : lambdas) {
      point.ttt.lambda0 = lambda;
      const ReconOutcome o = reconstruct(point, sim, &sim.truth);
      rows.push_back({sigma, lambda, *o.metrics});
    }
  }
  ensure_dir(cfg.out);
  std::string table = "sigma,lambda,psnr,ssim\n";
  for (const auto& r : rows)
    table += format_double(r.sigma) + "," + format_double(r.lambda) + "," + format_double(r.metrics.psnr) + "," +
             format_double(r.metrics.ssim) + "\n";
  write_text(cfg.out / "sweep_lambda.csv", table);
  std::string best = "sigma,argmax_lambda\n";
  for (double sigma : sigmas) best += format_double(sigma) + "," + format_double(sweep_argmax(rows, sigma)) + "\n";
  write_text(cfg.out / "sweep_argmax.csv", best);
  return rows;
}

double sweep_argmax(const std::vector<SweepRow>& rows, double sigma) {
  double best_lambda = std::nan("");
  double best_psnr = -std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    if (r.sigma == sigma && r.metrics.psnr > best_psnr) {
      best_psnr = r.metrics.psnr;
      best_lambda = r.lambda;
    }
  }
  return best_lambda;
}

ReconOutcome cmd_trace(const ExperimentConfig& cfg) {
  cfg.validate();
  const Simulation sim = load_simulation(cfg, true);
  ReconOutcome out = reconstruct(cfg, sim, &sim.truth);
  std::string text = "t,sure,mse,psnr\n";
  for (const auto& row : out.report.trace)
    text += std::to_string(row.t) + "," + format_double(row.sure) + "," + format_double(*row.mse) + "," +
            format_double(*row.psnr) + "\n";
  write_text(cfg.out / "trace.csv", text);
  const bool fired = out.report.t_es < static_cast<int>(cfg.sampler.total_steps);
  std::string marker = "t_es=" + std::to_string(out.report.t_es) + "\n";
  marker += std::string("early_stopped=") + (fired ? "true" : "false") + "\n";
  marker += "window=" + std::to_string(cfg.early_stop.resolved_window(cfg.sampler.total_steps)) + "\n";
  write_text(cfg.out / "trace_marker.txt", marker);
  return out;
}

std::vector<CompareRow> cmd_compare(const ExperimentConfig& cfg) {
  const Simulation sim = simulate(cfg);
  ensure_dir(cfg.out);
  std::vector<CompareRow> rows;
  std::string table = "method,psnr,ssim,t_es,final_lambda\n";
  for (Method m : all_methods) {
    ExperimentConfig run = cfg;
    run.sampler.method = m;
    const ReconOutcome o = reconstruct(run, sim, &sim.truth);
    rows.push_back({m, *o.metrics, o.report.t_es, o.report.final_lambda});
    const std::string tag(method_name(m));
    table += tag + "," + format_double(o.metrics->psnr) + "," + format_double(o.metrics->ssim) + "," +
             std::to_string(o.report.t_es) + "," + format_double(o.report.final_lambda) + "\n";
    save(cfg.out / ("compare_" + tag + ".smrd"), to_tensor(o.report.final_image));
  }
  write_text(cfg.out / "compare.csv", table);
  return rows;
}

}  // namespace smrd

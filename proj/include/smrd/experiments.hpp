#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "smrd/config.hpp"
#include "smrd/metrics.hpp"
#include "smrd/sampler.hpp"

namespace smrd {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ground truth, acquisition, and the prior mean for one configured experiment.
struct Simulation {
  ComplexImage truth;
  CoilSensitivities coils;
  SamplingMask mask;
  CoilStack kspace;  // noisy, masked
  ComplexImage prior_mean;
  double noise_std = 0.0;
};

Simulation simulate(const ExperimentConfig& cfg);
ScorePrior build_prior(const ExperimentConfig& cfg, const ComplexImage& prior_mean);

struct ReconOutcome {
  ReconReport report;
  std::optional<MetricPair> metrics;  // present when the truth is known
};

// Reconstruction of simulated data with cfg's method; the truth (if given) fills MSE/PSNR columns.
ReconOutcome reconstruct(const ExperimentConfig& cfg, const Simulation& sim, const ComplexImage* truth);

// ---- file-producing commands ---------------------------------------------------------

// Writes truth, coils, mask, kspace, prior_mean tensors plus manifest.txt and config.txt into cfg.out.
void cmd_simulate(const ExperimentConfig& cfg);

// Reads cfg.out written by cmd_simulate; writes recon_<method>.smrd, trace_<method>.csv, metrics_<method>.txt.
ReconOutcome cmd_recon(const ExperimentConfig& cfg);

struct SweepRow {
  double sigma;
  double lambda;
  MetricPair metrics;
};

// am_fixed over the (sigma, lambda) grid, each sigma simulated from cfg's seed. Writes sweep_lambda.csv
// and sweep_argmax.csv.
std::vector<SweepRow> cmd_sweep_lambda(const ExperimentConfig& cfg, const std::vector<double>& lambdas,
                                       const std::vector<double>& sigmas);
// PSNR-argmax lambda for one sigma (first maximum wins).
double sweep_argmax(const std::vector<SweepRow>& rows, double sigma);

// Runs cfg's method on the simulated data with the truth known; writes trace.csv and trace_marker.txt.
ReconOutcome cmd_trace(const ExperimentConfig& cfg);

struct CompareRow {
  Method method;
  MetricPair metrics;
  int t_es;
  double final_lambda;
};

// All five methods on one simulation; writes compare.csv and compare_<method>.smrd images.
std::vector<CompareRow> cmd_compare(const ExperimentConfig& cfg);

// CSV text helpers (exposed for tests).
std::string trace_csv(const ReconReport& report);
std::string format_double(double v);

}  // namespace smrd

// smrd: simulate, reconstruct, and analyse SURE-tuned Langevin MRI reconstructions.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>

#include "smrd/experiments.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_io = 3;
constexpr int exit_numerical = 4;

struct Overrides {
  std::string config_file;
  std::map<std::string, std::string> values;
};

// Every config key becomes a --key flag on the subcommand.
void add_config_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_file, "key=value config file; flags override it");
  for (const auto& key : smrd::config_keys()) {
    cmd->add_option_function<std::string>(
        "--" + key, [&o, key](const std::string& v) { o.values[key] = v; }, "config key " + key);
  }
}

smrd::ExperimentConfig resolve(const Overrides& o) {
  smrd::ExperimentConfig cfg = o.config_file.empty() ? smrd::ExperimentConfig{} : smrd::load_config(o.config_file);
  // steps first so an explicit steps-per-level still wins
  if (auto it = o.values.find("steps"); it != o.values.end()) {
    smrd::set_config_value(cfg, "steps", it->second);
    cfg.set_steps(cfg.sampler.total_steps);
  }
  for (const auto& [key, value] : o.values) {
    if (key != "steps") smrd::set_config_value(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

void print_metrics(const smrd::ReconOutcome& o) {
  std::printf("method=%s t_es=%d final_lambda=%s", std::string(smrd::method_name(o.report.method)).c_str(),
              o.report.t_es, smrd::format_double(o.report.final_lambda).c_str());
  if (o.metrics) std::printf(" psnr=%.3f ssim=%.4f", o.metrics->psnr, o.metrics->ssim);
  std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SURE-tuned annealed Langevin reconstruction for undersampled multicoil MRI"};
  app.require_subcommand(1);

  Overrides sim_o, recon_o, sweep_o, trace_o, compare_o;
  std::vector<double> lambdas{0.5, 1, 2, 4, 8, 16};
  std::vector<double> sigmas{0.0, 0.02};

  auto* sim_cmd = app.add_subcommand("simulate", "write truth, coils, mask and noisy k-space");
  add_config_flags(sim_cmd, sim_o);
  auto* recon_cmd = app.add_subcommand("recon", "reconstruct the simulated data in --out");
  add_config_flags(recon_cmd, recon_o);
  auto* sweep_cmd = app.add_subcommand("sweep-lambda", "fixed-lambda grid over noise levels");
  add_config_flags(sweep_cmd, sweep_o);
  sweep_cmd->add_option("--lambdas", lambdas, "lambda grid")->delimiter(',');
  sweep_cmd->add_option("--sigmas", sigmas, "noise grid")->delimiter(',');
  auto* trace_cmd = app.add_subcommand("trace", "SURE and true MSE per step for the simulated data in --out");
  add_config_flags(trace_cmd, trace_o);
  auto* compare_cmd = app.add_subcommand("compare", "all five methods on one simulation");
  add_config_flags(compare_cmd, compare_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  try {
    if (sim_cmd->parsed()) {
      const auto cfg = resolve(sim_o);
      smrd::cmd_simulate(cfg);
      std::printf("wrote %s\n", cfg.out.string().c_str());
    } else if (recon_cmd->parsed()) {
      print_metrics(smrd::cmd_recon(resolve(recon_o)));
    } else if (sweep_cmd->parsed()) {
      const auto cfg = resolve(sweep_o);
      const auto rows = smrd::cmd_sweep_lambda(cfg, lambdas, sigmas);
      for (double s : sigmas)
        std::printf("sigma=%s argmax_lambda=%s\n", smrd::format_double(s).c_str(),
                    smrd::format_double(smrd::sweep_argmax(rows, s)).c_str());
    } else if (trace_cmd->parsed()) {
      print_metrics(smrd::cmd_trace(resolve(trace_o)));
    } else if (compare_cmd->parsed()) {
      for (const auto& row : smrd::cmd_compare(resolve(compare_o)))
        std::printf("%-12s psnr=%.3f ssim=%.4f t_es=%d\n", std::string(smrd::method_name(row.method)).c_str(),
                    row.metrics.psnr, row.metrics.ssim, row.t_es);
    }
  } catch (const smrd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const smrd::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return exit_io;
  } catch (const smrd::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  } catch (const std::runtime_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return exit_io;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  }
  return 0;
}

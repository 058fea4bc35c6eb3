#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include "smrd/data.hpp"
#include "smrd/priors.hpp"
#include "smrd/sampler.hpp"
#include "smrd/sure.hpp"

namespace smrd {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class MaskKind { equispaced, poisson };
enum class PriorKind { gaussian, smoothness, zero };
enum class PriorMean { template_phantom, zero };

// Everything one experiment needs. Flat key=value text with one key per field; see keys().
struct ExperimentConfig {
  PhantomSpec phantom;
  std::size_t coils = 4;

  MaskKind mask = MaskKind::equispaced;
  double accel = 4.0;
  double acs = -1.0;  // negative: 8% of columns up to R=4, 4% above
  int calib = 16;

  double sigma = 0.0;
  bool density_comp = false;

  PriorKind prior = PriorKind::gaussian;
  PriorMean prior_mean = PriorMean::template_phantom;
  double tau2 = 1e-4;
  double jitter = 0.02;
  double gamma = 1.0;
  NoiseSchedule schedule;

  SamplerConfig sampler;
  TttConfig ttt;
  EarlyStopConfig early_stop;
  SureConfig sure;

  std::uint64_t seed = 0;
  std::filesystem::path out = "smrd_out";

  double resolved_acs() const { return acs >= 0.0 ? acs : (accel <= 4.0 ? 0.08 : 0.04); }
  // Keeps the schedule long enough for the requested number of steps.
  void set_steps(int steps);
  void validate() const;

  ReconSettings recon_settings() const { return {sampler, ttt, early_stop, sure}; }
};

// Applies one key=value assignment; unknown keys and malformed values raise ConfigError.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::map<std::string, std::string> config_values(const ExperimentConfig& cfg);
const std::vector<std::string>& config_keys();

std::string serialize_config(const ExperimentConfig& cfg);
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace smrd

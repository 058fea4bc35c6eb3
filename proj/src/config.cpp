#include "smrd/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace smrd {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end)
    throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end)
    throw ConfigError("config key '" + key + "': expected an unsigned integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <typename Enum>
Enum pick(const std::string& key, const std::string& v, std::initializer_list<std::pair<const char*, Enum>> options) {
  for (const auto& [name, value] : options) {
    if (v == name) return value;
  }
  throw ConfigError("config key '" + key + "': unsupported value '" + v + "'");
}

template <typename Enum>
std::string name_of(Enum e, std::initializer_list<std::pair<const char*, Enum>> options) {
  for (const auto& [name, value] : options) {
    if (e == value) return name;
  }
  return "?";
}

const std::initializer_list<std::pair<const char*, PhantomKind>> phantom_names = {
    {"shepp_logan", PhantomKind::shepp_logan}, {"blob_grid", PhantomKind::blob_grid}};
const std::initializer_list<std::pair<const char*, PhaseKind>> phase_names = {{"none", PhaseKind::none},
                                                                              {"smooth", PhaseKind::smooth}};
const std::initializer_list<std::pair<const char*, MaskKind>> mask_names = {{"equispaced", MaskKind::equispaced},
                                                                            {"poisson", MaskKind::poisson}};
const std::initializer_list<std::pair<const char*, PriorKind>> prior_names = {
    {"gaussian", PriorKind::gaussian}, {"smoothness", PriorKind::smoothness}, {"zero", PriorKind::zero}};
const std::initializer_list<std::pair<const char*, PriorMean>> mean_names = {
    {"template", PriorMean::template_phantom}, {"zero", PriorMean::zero}};

struct Field {
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"phantom", [](auto& c, const auto& v) { c.phantom.kind = pick("phantom", v, phantom_names); },
       [](const auto& c) { return name_of(c.phantom.kind, phantom_names); }},
      {"size", [](auto& c, const auto& v) { c.phantom.size = static_cast<int>(to_int("size", v)); },
       [](const auto& c) { return std::to_string(c.phantom.size); }},
      {"phase", [](auto& c, const auto& v) { c.phantom.phase = pick("phase", v, phase_names); },
       [](const auto& c) { return name_of(c.phantom.phase, phase_names); }},
      {"coils", [](auto& c, const auto& v) { c.coils = static_cast<std::size_t>(to_u64("coils", v)); },
       [](const auto& c) { return std::to_string(c.coils); }},
      {"mask", [](auto& c, const auto& v) { c.mask = pick("mask", v, mask_names); },
       [](const auto& c) { return name_of(c.mask, mask_names); }},
      {"accel", [](auto& c, const auto& v) { c.accel = to_double("accel", v); }, [](const auto& c) { return fmt(c.accel); }},
      {"acs", [](auto& c, const auto& v) { c.acs = to_double("acs", v); }, [](const auto& c) { return fmt(c.acs); }},
      {"calib", [](auto& c, const auto& v) { c.calib = static_cast<int>(to_int("calib", v)); },
       [](const auto& c) { return std::to_string(c.calib); }},
      {"sigma", [](auto& c, const auto& v) { c.sigma = to_double("sigma", v); }, [](const auto& c) { return fmt(c.sigma); }},
      {"density-comp", [](auto& c, const auto& v) { c.density_comp = to_bool("density-comp", v); },
       [](const auto& c) { return std::string(c.density_comp ? "true" : "false"); }},
      {"prior", [](auto& c, const auto& v) { c.prior = pick("prior", v, prior_names); },
       [](const auto& c) { return name_of(c.prior, prior_names); }},
      {"prior-mean", [](auto& c, const auto& v) { c.prior_mean = pick("prior-mean", v, mean_names); },
       [](const auto& c) { return name_of(c.prior_mean, mean_names); }},
      {"tau2", [](auto& c, const auto& v) { c.tau2 = to_double("tau2", v); }, [](const auto& c) { return fmt(c.tau2); }},
      {"jitter", [](auto& c, const auto& v) { c.jitter = to_double("jitter", v); }, [](const auto& c) { return fmt(c.jitter); }},
      {"gamma", [](auto& c, const auto& v) { c.gamma = to_double("gamma", v); }, [](const auto& c) { return fmt(c.gamma); }},
      {"levels", [](auto& c, const auto& v) { c.schedule.levels = static_cast<int>(to_int("levels", v)); },
       [](const auto& c) { return std::to_string(c.schedule.levels); }},
      {"steps-per-level", [](auto& c, const auto& v) { c.schedule.steps_per_level = static_cast<int>(to_int("steps-per-level", v)); },
       [](const auto& c) { return std::to_string(c.schedule.steps_per_level); }},
      {"beta-max", [](auto& c, const auto& v) { c.schedule.beta_max = to_double("beta-max", v); },
       [](const auto& c) { return fmt(c.schedule.beta_max); }},
      {"beta-min", [](auto& c, const auto& v) { c.schedule.beta_min = to_double("beta-min", v); },
       [](const auto& c) { return fmt(c.schedule.beta_min); }},
      {"eps0", [](auto& c, const auto& v) { c.schedule.eps0 = to_double("eps0", v); },
       [](const auto& c) { return fmt(c.schedule.eps0); }},
      {"steps", [](auto& c, const auto& v) { c.sampler.total_steps = static_cast<int>(to_int("steps", v)); },
       [](const auto& c) { return std::to_string(c.sampler.total_steps); }},
      {"cg-iters", [](auto& c, const auto& v) { c.sampler.cg_iters = static_cast<int>(to_int("cg-iters", v)); },
       [](const auto& c) { return std::to_string(c.sampler.cg_iters); }},
      {"method",
       [](auto& c, const auto& v) {
         try {
           c.sampler.method = parse_method(v);
         } catch (const std::invalid_argument& e) {
           throw ConfigError(e.what());
         }
       },
       [](const auto& c) { return std::string(method_name(c.sampler.method)); }},
      {"dc-weight", [](auto& c, const auto& v) { c.sampler.dc_weight = to_double("dc-weight", v); },
       [](const auto& c) { return fmt(c.sampler.dc_weight); }},
      {"lambda0", [](auto& c, const auto& v) { c.ttt.lambda0 = to_double("lambda0", v); },
       [](const auto& c) { return fmt(c.ttt.lambda0); }},
      {"alpha", [](auto& c, const auto& v) { c.ttt.alpha = to_double("alpha", v); }, [](const auto& c) { return fmt(c.ttt.alpha); }},
      {"freeze", [](auto& c, const auto& v) { c.ttt.freeze_fraction = to_double("freeze", v); },
       [](const auto& c) { return fmt(c.ttt.freeze_fraction); }},
      {"lambda-min", [](auto& c, const auto& v) { c.ttt.lambda_min = to_double("lambda-min", v); },
       [](const auto& c) { return fmt(c.ttt.lambda_min); }},
      {"lambda-max", [](auto& c, const auto& v) { c.ttt.lambda_max = to_double("lambda-max", v); },
       [](const auto& c) { return fmt(c.ttt.lambda_max); }},
      {"window", [](auto& c, const auto& v) { c.early_stop.window = static_cast<int>(to_int("window", v)); },
       [](const auto& c) { return std::to_string(c.early_stop.window); }},
      {"sure-eps", [](auto& c, const auto& v) { c.sure.relative_epsilon = to_double("sure-eps", v); },
       [](const auto& c) { return fmt(c.sure.relative_epsilon); }},
      {"probes", [](auto& c, const auto& v) { c.sure.probes = static_cast<int>(to_int("probes", v)); },
       [](const auto& c) { return std::to_string(c.sure.probes); }},
      {"seed",
       [](auto& c, const auto& v) {
         c.seed = to_u64("seed", v);
         c.sampler.seed = c.seed;
       },
       [](const auto& c) { return std::to_string(c.seed); }},
      {"out", [](auto& c, const auto& v) { c.out = v; }, [](const auto& c) { return c.out.string(); }},
  };
  return table;
}

}  // namespace

void ExperimentConfig::set_steps(int steps) {
  sampler.total_steps = steps;
  if (steps > 0 && schedule.levels > 0) schedule.steps_per_level = (steps + schedule.levels - 1) / schedule.levels;
}

void ExperimentConfig::validate() const {
  try {
    if (phantom.size < 16) throw ConfigError("size must be at least 16");
    if (coils < 1) throw ConfigError("coils must be >= 1");
    if (!(accel >= 1.0)) throw ConfigError("accel must be >= 1");
    if (!(sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
    if (acs >= 1.0) throw ConfigError("acs must be below 1");
    if (calib < 0 || calib > phantom.size) throw ConfigError("calib must lie in [0, size]");
    if (!(jitter >= 0.0 && jitter < 1.0)) throw ConfigError("jitter must lie in [0, 1)");
    if (prior == PriorKind::gaussian && !(tau2 > 0.0)) throw ConfigError("tau2 must be positive");
    if (prior == PriorKind::smoothness && !(gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
    if (early_stop.window < 0) throw ConfigError("window must be >= 0 (0 selects the default)");
    schedule.validate();
    sampler.validate();
    ttt.validate();
    sure.validate();
    if (sampler.total_steps > schedule.total_steps())
      throw ConfigError("steps exceeds levels * steps-per-level");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

std::map<std::string, std::string> config_values(const ExperimentConfig& cfg) {
  std::map<std::string, std::string> out;
  for (const auto& f : fields()) out[f.key] = f.get(cfg);
  return out;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.emplace_back(f.key);
    return k;
  }();
  return keys;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string text;
  for (const auto& f : fields()) text += std::string(f.key) + " = " + f.get(cfg) + "\n";
  return text;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace smrd

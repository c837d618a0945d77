#include "cscensor/config.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>

#include "cscensor/batch_io.hpp"
#include "cscensor/error.hpp"

namespace cscensor {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + text + "'");
  }
  return v;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& text) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("config: '" + key + "' expects an integer, got '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("config: '" + key + "' expects true/false, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool is_sweep_param(std::string_view p) {
  return p == "M" || p == "snr_db" || p == "alpha" || p == "beta" || p == "lambda";
}

}  // namespace

std::string_view protocol_name(Protocol p) {
  switch (p) {
    case Protocol::kCsL1:
      return "cs_l1";
    case Protocol::kCscL1:
      return "csc_l1";
    case Protocol::kCscModifiedL1:
      return "csc_modified_l1";
  }
  return "unknown";
}

Protocol parse_protocol(std::string_view name) {
  if (name == "cs_l1") return Protocol::kCsL1;
  if (name == "csc_l1") return Protocol::kCscL1;
  if (name == "csc_modified_l1") return Protocol::kCscModifiedL1;
  throw ConfigError("config: unknown protocol '" + std::string(name) + "'");
}

ModelParams ExperimentConfig::resolved_model() const {
  ModelParams m = model;
  if (sigma_v) {
    m.sigma_v = *sigma_v;
  } else if (snr_db) {
    m.sigma_v = sigma_v_from_snr(*snr_db, m);
  }
  return m;
}

ExperimentConfig ExperimentConfig::with_param(std::string_view name, double value) const {
  ExperimentConfig out = *this;
  if (name == "M") {
    if (value < 1.0 || value != std::floor(value)) throw ConfigError("sweep: M must be a positive integer");
    out.model.M = static_cast<std::size_t>(value);
  } else if (name == "snr_db") {
    out.snr_db = value;
    out.sigma_v.reset();
  } else if (name == "alpha") {
    out.censor.alpha = value;
  } else if (name == "beta") {
    out.censor.beta = value;
  } else if (name == "lambda") {
    out.lambda = value;
  } else {
    throw ConfigError("sweep: unsupported parameter '" + std::string(name) + "'");
  }
  return out;
}

void ExperimentConfig::validate() const {
  validate_point();
  if (sweep) {
    if (!is_sweep_param(sweep->param)) throw ConfigError("config: cannot sweep '" + sweep->param + "'");
    if (sweep->values.empty()) throw ConfigError("config: sweep has no values");
    for (double v : sweep->values) with_param(sweep->param, v).validate_point();
  }
}

void ExperimentConfig::validate_point() const {
  try {
    if (snr_db.has_value() == sigma_v.has_value()) {
      throw ConfigError("config: exactly one of snr_db and sigma_v must be given");
    }
    resolved_model().validate();
    // beta = 1 is admitted: it only places the outer threshold at zero
    CensorConfig check = censor;
    if (check.beta == 1.0) check.beta = 0.5;
    check.validate();
  } catch (const InvalidDimension& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!(lambda > 0.0)) throw ConfigError("config: lambda must be > 0");
  if (trials < 1) throw ConfigError("config: trials must be >= 1");
  if (protocols.empty()) throw ConfigError("config: no protocols selected");
  if (!(epsilon_scale >= 0.0)) throw ConfigError("config: epsilon_scale must be >= 0");
  if (max_iterations < 1) throw ConfigError("config: max_iterations must be >= 1");
  if (!(residual_tolerance > 0.0)) throw ConfigError("config: residual_tolerance must be > 0");
  if (!(failure_threshold >= 0.0 && failure_threshold <= 1.0)) {
    throw ConfigError("config: failure_threshold must lie in [0, 1]");
  }
  if (!(grid_step_ratio > 0.0)) throw ConfigError("config: grid_step_ratio must be > 0");
}

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    kv[key] = trim(std::string_view(line).substr(eq + 1));
  }
  return kv;
}

std::pair<std::string, std::string> parse_override(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(text) + "': expected key=value");
  std::string key = trim(text.substr(0, eq));
  if (key.empty()) throw ConfigError("override '" + std::string(text) + "': empty key");
  return {key, trim(text.substr(eq + 1))};
}

ExperimentConfig config_from_key_values(const KeyValues& kv) {
  ExperimentConfig cfg;
  std::optional<std::string> sweep_param;
  std::vector<double> sweep_values;
  for (const auto& [key, value] : kv) {
    if (key == "N") {
      cfg.model.N = to_int<std::size_t>(key, value);
    } else if (key == "K") {
      cfg.model.K = to_int<std::size_t>(key, value);
    } else if (key == "K_c" || key == "Kc") {
      cfg.model.K_c = to_int<std::size_t>(key, value);
    } else if (key == "sigma_s") {
      cfg.model.sigma_s = to_double(key, value);
    } else if (key == "M") {
      cfg.model.M = to_int<std::size_t>(key, value);
    } else if (key == "snr_db") {
      cfg.snr_db = to_double(key, value);
    } else if (key == "sigma_v") {
      cfg.sigma_v = to_double(key, value);
    } else if (key == "alpha") {
      cfg.censor.alpha = to_double(key, value);
    } else if (key == "beta") {
      cfg.censor.beta = to_double(key, value);
    } else if (key == "cost_hard") {
      cfg.censor.cost_hard = to_double(key, value);
    } else if (key == "cost_value") {
      cfg.censor.cost_value = to_double(key, value);
    } else if (key == "lambda") {
      cfg.lambda = to_double(key, value);
    } else if (key == "trials") {
      cfg.trials = to_int<std::size_t>(key, value);
    } else if (key == "seed") {
      cfg.seed = to_int<std::uint64_t>(key, value);
    } else if (key == "protocols") {
      cfg.protocols.clear();
      for (const auto& name : split_list(value)) cfg.protocols.push_back(parse_protocol(name));
    } else if (key == "sweep") {
      if (!value.empty()) sweep_param = value;
    } else if (key == "sweep_values") {
      for (const auto& v : split_list(value)) sweep_values.push_back(to_double(key, v));
    } else if (key == "csc_use_hard_rows") {
      cfg.csc_use_hard_rows = to_bool(key, value);
    } else if (key == "epsilon_scale") {
      cfg.epsilon_scale = to_double(key, value);
    } else if (key == "max_iterations") {
      cfg.max_iterations = to_int<int>(key, value);
    } else if (key == "residual_tolerance") {
      cfg.residual_tolerance = to_double(key, value);
    } else if (key == "failure_threshold") {
      cfg.failure_threshold = to_double(key, value);
    } else if (key == "threads") {
      cfg.threads = to_int<unsigned>(key, value);
    } else if (key == "grid_step_ratio") {
      cfg.grid_step_ratio = to_double(key, value);
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  if (sweep_param) {
    cfg.sweep = Sweep{*sweep_param, sweep_values};
  } else if (!sweep_values.empty()) {
    throw ConfigError("config: sweep_values given without sweep");
  }
  cfg.validate();
  return cfg;
}

std::string describe(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "N=" << cfg.model.N << "\nK=" << cfg.model.K << "\nK_c=" << cfg.model.K_c
      << "\nsigma_s=" << to_text(cfg.model.sigma_s) << "\nM=" << cfg.model.M << '\n';
  if (cfg.snr_db) out << "snr_db=" << to_text(*cfg.snr_db) << '\n';
  if (cfg.sigma_v) out << "sigma_v=" << to_text(*cfg.sigma_v) << '\n';
  out << "alpha=" << to_text(cfg.censor.alpha) << "\nbeta=" << to_text(cfg.censor.beta)
      << "\ncost_hard=" << to_text(cfg.censor.cost_hard) << "\ncost_value=" << to_text(cfg.censor.cost_value)
      << "\nlambda=" << to_text(cfg.lambda) << "\ntrials=" << cfg.trials << "\nseed=" << cfg.seed << "\nprotocols=";
  for (std::size_t i = 0; i < cfg.protocols.size(); ++i) {
    out << (i ? "," : "") << protocol_name(cfg.protocols[i]);
  }
  out << '\n';
  if (cfg.sweep) {
    out << "sweep=" << cfg.sweep->param << "\nsweep_values=";
    for (std::size_t i = 0; i < cfg.sweep->values.size(); ++i) out << (i ? "," : "") << to_text(cfg.sweep->values[i]);
    out << '\n';
  }
  out << "csc_use_hard_rows=" << (cfg.csc_use_hard_rows ? "true" : "false")
      << "\nepsilon_scale=" << to_text(cfg.epsilon_scale) << "\nmax_iterations=" << cfg.max_iterations
      << "\nresidual_tolerance=" << to_text(cfg.residual_tolerance)
      << "\nfailure_threshold=" << to_text(cfg.failure_threshold) << "\nthreads=" << cfg.threads
      << "\ngrid_step_ratio=" << to_text(cfg.grid_step_ratio) << '\n';
  return out.str();
}

}  // namespace cscensor

#pragma once

// Strict JSON run/sweep configuration. Frequencies in files are ordinary
// frequencies f = w / 2pi (numbers in Hz, or strings such as "6.13 GHz");
// durations are seconds (numbers, or strings such as "2 us").

#include <cctype>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "quadtangle/analysis.hpp"
#include "quadtangle/dynamics.hpp"
#include "quadtangle/hamiltonian.hpp"

namespace quadtangle {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// System parameters as written in files (Hz).
struct SystemParamsHz {
  double omega_c = 0.0;
  double Omega_L = 0.0;
  double Omega_M = 0.0;
  double Omega_R = 0.0;
  double eta_L = 0.0;
  double eta_M = 0.0;
  double eta_R = 0.0;
  double epsilon_D = 0.0;
  double omega_D = 0.0;
  QubitZConvention z_convention = QubitZConvention::Full;

  SystemParams angular() const {
    SystemParams p;
    p.omega_c = kTwoPi * omega_c;
    p.Omega_L = kTwoPi * Omega_L;
    p.Omega_M = kTwoPi * Omega_M;
    p.Omega_R = kTwoPi * Omega_R;
    p.eta_L = kTwoPi * eta_L;
    p.eta_M = kTwoPi * eta_M;
    p.eta_R = kTwoPi * eta_R;
    p.epsilon_D = kTwoPi * epsilon_D;
    p.omega_D = kTwoPi * omega_D;
    p.z_convention = z_convention;
    return p;
  }

  friend bool operator==(const SystemParamsHz&, const SystemParamsHz&) = default;
};

struct SweepSpec {
  std::vector<double> lambda_values;
  std::vector<double> eta_L_hz;
  double bin_width = 0.025;

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct RunConfig {
  SystemParamsHz system;
  InitialState initial_state = InitialState::mixed();
  IntegratorConfig integrator;
  std::vector<std::string> outputs{"series"};
  PeriodOptions analysis;
  std::optional<SweepSpec> sweep;

  SweepGrid grid() const {
    if (!sweep) throw ConfigError("config has no sweep section");
    SweepGrid g;
    g.lambda_values = sweep->lambda_values;
    for (double f : sweep->eta_L_hz) g.eta_L_values.push_back(kTwoPi * f);
    g.fixed = system.angular();
    g.init = initial_state;
    g.cfg = integrator;
    g.period = analysis;
    return g;
  }
};

inline bool operator==(const InitialState& a, const InitialState& b) {
  if (a.preset_name() != b.preset_name() || a.terms().size() != b.terms().size()) return false;
  for (std::size_t i = 0; i < a.terms().size(); ++i)
    if (a.terms()[i] != b.terms()[i]) return false;
  return true;
}

inline bool operator==(const PeriodOptions& a, const PeriodOptions& b) {
  return a.zero_threshold == b.zero_threshold && a.min_separation == b.min_separation &&
         a.envelope_window == b.envelope_window && a.max_spread == b.max_spread;
}

inline bool operator==(const IntegratorConfig& a, const IntegratorConfig& b) {
  return a.t_end == b.t_end && a.dt == b.dt && a.sample_stride == b.sample_stride &&
         a.convergence_check == b.convergence_check;
}

inline bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.system == b.system && a.initial_state == b.initial_state && a.integrator == b.integrator &&
         a.outputs == b.outputs && a.analysis == b.analysis && a.sweep == b.sweep;
}

namespace config_detail {

inline std::string lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

// Parses "<number> <unit>" against a table of (suffix, scale) pairs.
inline double parse_quantity(const json& v, const std::string& path,
                             const std::vector<std::pair<std::string, double>>& units, const char* what) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) throw ConfigError(path + ": expected a number or a string with " + what + " unit");
  const std::string text = v.get<std::string>();
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(path + ": cannot parse '" + text + "'");
  }
  std::string unit = text.substr(used);
  unit.erase(0, unit.find_first_not_of(" \t"));
  unit.erase(unit.find_last_not_of(" \t") + 1);
  for (const auto& [suffix, scale] : units)
    if (lower(unit) == lower(suffix)) return value * scale;
  throw ConfigError(path + ": unknown " + std::string(what) + " unit '" + unit + "'");
}

inline double frequency(const json& v, const std::string& path) {
  return parse_quantity(v, path, {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}}, "frequency");
}

inline double duration(const json& v, const std::string& path) {
  return parse_quantity(v, path, {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}}, "time");
}

inline void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) throw ConfigError(path + "." + item.key() + ": unknown key");
  }
}

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path + "." + key + ": required field missing");
  return *it;
}

inline double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  return v.get<double>();
}

// Either an explicit list or {"start", "stop", "step"} (inclusive stop).
template <typename Convert>
std::vector<double> value_list(const json& v, const std::string& path, Convert&& convert) {
  std::vector<double> out;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(convert(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }
  reject_unknown(v, path, {"start", "stop", "step"});
  const double start = convert(require(v, "start", path), path + ".start");
  const double stop = convert(require(v, "stop", path), path + ".stop");
  const double step = convert(require(v, "step", path), path + ".step");
  if (!(step > 0.0)) throw ConfigError(path + ".step: must be positive");
  if (stop < start) throw ConfigError(path + ": stop is below start");
  const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (long long i = 0; i < count; ++i) out.push_back(start + double(i) * step);
  return out;
}

}  // namespace config_detail

inline RunConfig parse_config(const json& doc) {
  using namespace config_detail;
  reject_unknown(doc, "config", {"system", "initial_state", "integrator", "outputs", "analysis", "sweep"});
  RunConfig cfg;

  const json& sys = require(doc, "system", "config");
  reject_unknown(sys, "system", {"omega_c", "Omega_L", "Omega_M", "Omega_R", "eta_L", "eta_M", "eta_R",
                                 "epsilon_D", "omega_D", "qubit_z_convention"});
  auto f = [&](const char* key) { return frequency(require(sys, key, "system"), std::string("system.") + key); };
  cfg.system.omega_c = f("omega_c");
  cfg.system.Omega_L = f("Omega_L");
  cfg.system.Omega_M = f("Omega_M");
  cfg.system.Omega_R = f("Omega_R");
  cfg.system.eta_L = f("eta_L");
  cfg.system.eta_M = f("eta_M");
  cfg.system.eta_R = f("eta_R");
  cfg.system.epsilon_D = f("epsilon_D");
  cfg.system.omega_D = f("omega_D");
  if (auto it = sys.find("qubit_z_convention"); it != sys.end()) {
    if (*it == "full") {
      cfg.system.z_convention = QubitZConvention::Full;
    } else if (*it == "half") {
      cfg.system.z_convention = QubitZConvention::Half;
    } else {
      throw ConfigError("system.qubit_z_convention: expected \"full\" or \"half\"");
    }
  }
  try {
    validate(cfg.system.angular());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("system: ") + e.what());
  }

  if (auto it = doc.find("initial_state"); it != doc.end()) {
    try {
      if (it->is_string()) {
        cfg.initial_state = InitialState::preset(it->get<std::string>());
      } else {
        reject_unknown(*it, "initial_state", {"preset", "amplitudes"});
        if (it->contains("preset") == it->contains("amplitudes")) {
          throw ConfigError("initial_state: give exactly one of preset or amplitudes");
        }
        if (it->contains("preset")) {
          const json& name = (*it)["preset"];
          if (!name.is_string()) throw ConfigError("initial_state.preset: expected a string");
          cfg.initial_state = InitialState::preset(name.get<std::string>());
        } else {
          const json& amps = (*it)["amplitudes"];
          if (!amps.is_array() || amps.empty()) throw ConfigError("initial_state.amplitudes: expected a non-empty list");
          std::vector<InitialState::Term> terms;
          for (std::size_t i = 0; i < amps.size(); ++i) {
            const std::string p = "initial_state.amplitudes[" + std::to_string(i) + "]";
            reject_unknown(amps[i], p, {"m", "n", "re", "im"});
            const json& m = require(amps[i], "m", p);
            const json& n = require(amps[i], "n", p);
            if (!m.is_number_integer() || !n.is_number_integer()) throw ConfigError(p + ": m and n must be integers");
            const double re = number(require(amps[i], "re", p), p + ".re");
            const double im = amps[i].contains("im") ? number(amps[i]["im"], p + ".im") : 0.0;
            const BareIndex idx{m.get<int>(), n.get<int>()};
            flat_index(idx);
            terms.emplace_back(idx, Complex(re, im));
          }
          cfg.initial_state = InitialState::explicit_terms(std::move(terms));
        }
      }
    } catch (const DomainError& e) {
      throw ConfigError(std::string("initial_state: ") + e.what());
    }
  }

  if (auto it = doc.find("integrator"); it != doc.end()) {
    reject_unknown(*it, "integrator", {"t_end", "dt", "sample_stride", "convergence_check"});
    if (it->contains("t_end")) cfg.integrator.t_end = duration((*it)["t_end"], "integrator.t_end");
    if (it->contains("dt")) cfg.integrator.dt = duration((*it)["dt"], "integrator.dt");
    if (it->contains("sample_stride")) {
      const json& s = (*it)["sample_stride"];
      if (!s.is_number_integer() || s.get<long long>() < 1) {
        throw ConfigError("integrator.sample_stride: expected an integer >= 1");
      }
      cfg.integrator.sample_stride = s.get<int>();
    }
    if (it->contains("convergence_check")) {
      const json& c = (*it)["convergence_check"];
      if (!c.is_boolean()) throw ConfigError("integrator.convergence_check: expected true or false");
      cfg.integrator.convergence_check = c.get<bool>();
    }
  }
  try {
    cfg.integrator.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("integrator: ") + e.what());
  }

  if (auto it = doc.find("outputs"); it != doc.end()) {
    if (!it->is_array()) throw ConfigError("outputs: expected a list");
    cfg.outputs.clear();
    for (const auto& o : *it) {
      if (!o.is_string()) throw ConfigError("outputs: entries must be strings");
      const auto name = o.get<std::string>();
      if (name != "series" && name != "trajectory" && name != "spectrum") {
        throw ConfigError("outputs: unknown selector '" + name + "' (series, trajectory, spectrum)");
      }
      cfg.outputs.push_back(name);
    }
  }

  if (auto it = doc.find("analysis"); it != doc.end()) {
    reject_unknown(*it, "analysis", {"zero_threshold", "min_separation", "envelope_window", "max_spread"});
    if (it->contains("zero_threshold")) cfg.analysis.zero_threshold = number((*it)["zero_threshold"], "analysis.zero_threshold");
    if (it->contains("min_separation")) cfg.analysis.min_separation = duration((*it)["min_separation"], "analysis.min_separation");
    if (it->contains("envelope_window")) cfg.analysis.envelope_window = duration((*it)["envelope_window"], "analysis.envelope_window");
    if (it->contains("max_spread")) cfg.analysis.max_spread = number((*it)["max_spread"], "analysis.max_spread");
    if (!(cfg.analysis.zero_threshold > 0.0 && cfg.analysis.zero_threshold < 1.0)) {
      throw ConfigError("analysis.zero_threshold: must lie in (0, 1)");
    }
  }

  if (auto it = doc.find("sweep"); it != doc.end()) {
    reject_unknown(*it, "sweep", {"lambda", "eta_L", "bin_width"});
    SweepSpec s;
    s.lambda_values = value_list(require(*it, "lambda", "sweep"), "sweep.lambda", number);
    s.eta_L_hz = value_list(require(*it, "eta_L", "sweep"), "sweep.eta_L", frequency);
    if (it->contains("bin_width")) s.bin_width = number((*it)["bin_width"], "sweep.bin_width");
    if (!(s.bin_width > 0.0)) throw ConfigError("sweep.bin_width: must be positive");
    for (double l : s.lambda_values)
      if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("sweep.lambda: values must lie in [0, 1]");
    if (s.lambda_values.empty() || s.eta_L_hz.empty()) throw ConfigError("sweep: empty grid");
    cfg.sweep = std::move(s);
  }
  return cfg;
}

inline RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("JSON syntax error: ") + e.what());
  }
  return parse_config(doc);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

/// Resolved configuration in the same schema (numbers in Hz and seconds),
/// so that parse_config(to_json(c)) == c.
inline json to_json(const RunConfig& c) {
  json sys = {{"omega_c", c.system.omega_c},     {"Omega_L", c.system.Omega_L},
              {"Omega_M", c.system.Omega_M},     {"Omega_R", c.system.Omega_R},
              {"eta_L", c.system.eta_L},         {"eta_M", c.system.eta_M},
              {"eta_R", c.system.eta_R},         {"epsilon_D", c.system.epsilon_D},
              {"omega_D", c.system.omega_D},     {"qubit_z_convention", to_string(c.system.z_convention)}};
  json init;
  if (c.initial_state.is_preset()) {
    init = c.initial_state.preset_name();
  } else {
    json amps = json::array();
    for (const auto& [idx, amp] : c.initial_state.terms()) {
      amps.push_back({{"m", idx.m}, {"n", idx.n}, {"re", amp.real()}, {"im", amp.imag()}});
    }
    init = {{"amplitudes", amps}};
  }
  json doc = {
      {"system", sys},
      {"initial_state", init},
      {"integrator",
       {{"t_end", c.integrator.t_end},
        {"dt", c.integrator.dt},
        {"sample_stride", c.integrator.sample_stride},
        {"convergence_check", c.integrator.convergence_check}}},
      {"outputs", c.outputs},
      {"analysis",
       {{"zero_threshold", c.analysis.zero_threshold},
        {"min_separation", c.analysis.min_separation},
        {"envelope_window", c.analysis.envelope_window},
        {"max_spread", c.analysis.max_spread}}},
  };
  if (c.sweep) {
    doc["sweep"] = {{"lambda", c.sweep->lambda_values}, {"eta_L", c.sweep->eta_L_hz}, {"bin_width", c.sweep->bin_width}};
  }
  return doc;
}

}  // namespace quadtangle

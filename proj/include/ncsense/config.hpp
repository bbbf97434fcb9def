#pragma once

// Experiment parameters: defaults, validation, and the flat key = value file
// format shared by the CLI (--config / --set).

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "ncsense/errors.hpp"

namespace ncsense {

// Which symbol duration feeds the Doppler-bin to velocity mapping.
// SymbolTotal uses T_sym = T_ofdm + T_cp (the mapping formula as printed);
// Elementary uses T_ofdm, which is what reproduces the 13.3929 m/s figure.
enum class DurationMode { SymbolTotal, Elementary };

inline std::string_view to_string(DurationMode m) {
  return m == DurationMode::SymbolTotal ? "symbol_total" : "elementary";
}

struct SimulationConfig {
  int n_subcarriers = 512;
  int n_occupied = 256;
  int n_symbols = 14;
  double carrier_freq_hz = 24.0e9;
  double subcarrier_spacing_hz = 15.0e3;
  double elementary_symbol_s = 66.67e-6;
  double cp_length_s = 16.67e-6;
  double symbol_duration_s = 83.34e-6;
  double target_range_m = 117.0;
  double target_velocity_mps = 13.0;
  double light_speed_mps = 3.0e8;
  int kcv_folds = 14;
  std::uint64_t rng_seed = 0;
  DurationMode velocity_duration_mode = DurationMode::SymbolTotal;

  // Regularization weights handed to the estimators are divided by these
  // before reaching the solver. The range default maps the tabulated range
  // weights (O(10^3)) onto unitary-normalized operators.
  double range_lambda_scale = 512.0;
  double velocity_lambda_scale = 1.0;

  int fista_max_iters = 500;
  double fista_error_tol = 1e-6;

  // Duration used by the velocity bin mapping under the configured mode.
  double velocity_mapping_duration() const {
    return velocity_duration_mode == DurationMode::SymbolTotal ? symbol_duration_s
                                                               : elementary_symbol_s;
  }

  double range_bin_width() const {
    return light_speed_mps / (2.0 * n_subcarriers * subcarrier_spacing_hz);
  }

  double velocity_bin_width() const {
    return light_speed_mps /
           (2.0 * n_symbols * velocity_mapping_duration() * carrier_freq_hz);
  }

  double unambiguous_range() const {
    return light_speed_mps / (2.0 * subcarrier_spacing_hz);
  }

  bool operator==(const SimulationConfig&) const = default;
};

inline SimulationConfig default_config() { return SimulationConfig{}; }

struct ValidationOutcome {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }

  std::string message() const {
    std::string out;
    for (const auto& v : violations) {
      if (!out.empty()) out += "; ";
      out += v;
    }
    return out;
  }
};

inline ValidationOutcome validate_config(const SimulationConfig& cfg) {
  ValidationOutcome out;
  auto require = [&](bool cond, const char* name) {
    if (!cond) out.violations.emplace_back(name);
  };
  require(cfg.n_subcarriers > 0, "n_subcarriers > 0");
  require(cfg.n_occupied > 0, "n_occupied > 0");
  require(cfg.n_symbols > 0, "n_symbols > 0");
  require(cfg.carrier_freq_hz > 0, "carrier_freq_hz > 0");
  require(cfg.subcarrier_spacing_hz > 0, "subcarrier_spacing_hz > 0");
  require(cfg.elementary_symbol_s > 0, "elementary_symbol_s > 0");
  require(cfg.cp_length_s >= 0, "cp_length_s >= 0");
  require(cfg.symbol_duration_s > 0, "symbol_duration_s > 0");
  require(cfg.target_range_m >= 0, "target_range_m >= 0");
  require(std::isfinite(cfg.target_velocity_mps), "target_velocity_mps finite");
  require(cfg.light_speed_mps > 0, "light_speed_mps > 0");
  require(cfg.kcv_folds > 0, "kcv_folds > 0");
  require(cfg.range_lambda_scale > 0, "range_lambda_scale > 0");
  require(cfg.velocity_lambda_scale > 0, "velocity_lambda_scale > 0");
  require(cfg.fista_max_iters >= 1, "fista_max_iters >= 1");
  require(cfg.fista_error_tol >= 0, "fista_error_tol >= 0");

  require(cfg.n_occupied <= cfg.n_subcarriers, "n_occupied <= n_subcarriers");
  const double total = cfg.elementary_symbol_s + cfg.cp_length_s;
  require(std::abs(cfg.symbol_duration_s - total) <= 1e-9 * std::abs(total),
          "symbol_duration_s = elementary_symbol_s + cp_length_s");
  require(cfg.kcv_folds <= cfg.n_symbols, "kcv_folds <= n_symbols");
  if (cfg.light_speed_mps > 0 && cfg.subcarrier_spacing_hz > 0) {
    require(cfg.target_range_m < cfg.unambiguous_range(),
            "target_range_m < unambiguous range c/(2*subcarrier_spacing_hz)");
  }
  return out;
}

namespace detail {

using FieldRef = std::variant<int SimulationConfig::*, double SimulationConfig::*,
                              std::uint64_t SimulationConfig::*,
                              DurationMode SimulationConfig::*>;

struct Field {
  std::string_view name;
  FieldRef ref;
};

inline const auto& config_fields() {
  using C = SimulationConfig;
  static const std::array<Field, 18> fields{{
      {"n_subcarriers", &C::n_subcarriers},
      {"n_occupied", &C::n_occupied},
      {"n_symbols", &C::n_symbols},
      {"carrier_freq_hz", &C::carrier_freq_hz},
      {"subcarrier_spacing_hz", &C::subcarrier_spacing_hz},
      {"elementary_symbol_s", &C::elementary_symbol_s},
      {"cp_length_s", &C::cp_length_s},
      {"symbol_duration_s", &C::symbol_duration_s},
      {"target_range_m", &C::target_range_m},
      {"target_velocity_mps", &C::target_velocity_mps},
      {"light_speed_mps", &C::light_speed_mps},
      {"kcv_folds", &C::kcv_folds},
      {"rng_seed", &C::rng_seed},
      {"velocity_duration_mode", &C::velocity_duration_mode},
      {"range_lambda_scale", &C::range_lambda_scale},
      {"velocity_lambda_scale", &C::velocity_lambda_scale},
      {"fista_max_iters", &C::fista_max_iters},
      {"fista_error_tol", &C::fista_error_tol},
  }};
  return fields;
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

inline std::string format_double(double v) {
  // Shortest representation that round-trips exactly.
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

// Sets one field from its textual value. `where` prefixes error messages.
inline void set_config_value(SimulationConfig& cfg, std::string_view key,
                             std::string_view value, const std::string& where = {}) {
  const std::string prefix = where.empty() ? std::string{} : where + ": ";
  key = detail::trim(key);
  value = detail::trim(value);
  for (const auto& field : detail::config_fields()) {
    if (field.name != key) continue;
    const bool ok = std::visit(
        [&](auto member) {
          using T = std::remove_cvref_t<decltype(cfg.*member)>;
          if constexpr (std::is_same_v<T, DurationMode>) {
            if (value == "symbol_total" || value == "symbol") {
              cfg.*member = DurationMode::SymbolTotal;
            } else if (value == "elementary") {
              cfg.*member = DurationMode::Elementary;
            } else {
              return false;
            }
            return true;
          } else {
            T parsed{};
            if (!detail::parse_number(value, parsed)) return false;
            cfg.*member = parsed;
            return true;
          }
        },
        field.ref);
    if (!ok) {
      throw ConfigError(prefix + "invalid value '" + std::string(value) + "' for key '" +
                        std::string(key) + "'");
    }
    return;
  }
  throw ConfigError(prefix + "unknown key '" + std::string(key) + "'");
}

// Applies "key = value" lines on top of `base`. Does not validate.
inline SimulationConfig parse_config(std::istream& in, SimulationConfig base = default_config(),
                                     const std::string& source = "config") {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = detail::trim(view);
    if (view.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(where + ": expected 'key = value', got '" + std::string(view) + "'");
    }
    set_config_value(base, view.substr(0, eq), view.substr(eq + 1), where);
  }
  return base;
}

inline void require_valid(const SimulationConfig& cfg) {
  const auto outcome = validate_config(cfg);
  if (!outcome.ok()) throw ValidationError("invalid configuration: " + outcome.message());
}

inline SimulationConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  auto cfg = parse_config(in, default_config(), path);
  require_valid(cfg);
  return cfg;
}

inline std::string config_to_string(const SimulationConfig& cfg) {
  std::ostringstream out;
  for (const auto& field : detail::config_fields()) {
    out << field.name << " = ";
    std::visit(
        [&](auto member) {
          using T = std::remove_cvref_t<decltype(cfg.*member)>;
          if constexpr (std::is_same_v<T, DurationMode>) {
            out << to_string(cfg.*member);
          } else if constexpr (std::is_same_v<T, double>) {
            out << detail::format_double(cfg.*member);
          } else {
            out << cfg.*member;
          }
        },
        field.ref);
    out << '\n';
  }
  return out.str();
}

inline void save_config(const SimulationConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file '" + path + "'");
  out << config_to_string(cfg);
}

}  // namespace ncsense

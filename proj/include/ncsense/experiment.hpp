#pragma once

// Batch experiments behind the CLI: single estimates, Monte-Carlo SNR
// sweeps, lambda tuning and the closed-form tables.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ncsense/channel.hpp"
#include "ncsense/config.hpp"
#include "ncsense/errors.hpp"
#include "ncsense/estimators.hpp"
#include "ncsense/metrics.hpp"
#include "ncsense/occupancy.hpp"
#include "ncsense/tuning.hpp"

namespace ncsense {

enum class ScenarioKind { S1, S2, File };

struct Scenario {
  ScenarioKind kind = ScenarioKind::S1;
  std::string mask_path;  // File only
};

inline Scenario parse_scenario(const std::string& text) {
  if (text == "s1") return {ScenarioKind::S1, {}};
  if (text == "s2") return {ScenarioKind::S2, {}};
  if (text.rfind("file:", 0) == 0 && text.size() > 5) return {ScenarioKind::File, text.substr(5)};
  throw std::invalid_argument("scenario must be s1, s2 or file:PATH, got '" + text + "'");
}

inline std::string to_string(const Scenario& s) {
  switch (s.kind) {
    case ScenarioKind::S1: return "s1";
    case ScenarioKind::S2: return "s2";
    case ScenarioKind::File: return "file:" + s.mask_path;
  }
  return "?";
}

inline OccupancyMask scenario_mask(const Scenario& scenario, const SimulationConfig& cfg) {
  switch (scenario.kind) {
    case ScenarioKind::S1: return scenario1_mask(cfg);
    case ScenarioKind::S2: return scenario2_mask(cfg);
    case ScenarioKind::File: {
      OccupancyMask mask = load_mask_csv(scenario.mask_path);
      if (mask.subcarriers() != cfg.n_subcarriers || mask.symbols() != cfg.n_symbols) {
        throw DimensionError("mask file '" + scenario.mask_path + "' is " +
                             std::to_string(mask.subcarriers()) + "x" +
                             std::to_string(mask.symbols()) + ", configuration expects " +
                             std::to_string(cfg.n_subcarriers) + "x" +
                             std::to_string(cfg.n_symbols));
      }
      return mask;
    }
  }
  throw std::logic_error("unhandled scenario");
}

inline Method parse_method(const std::string& text) {
  if (text == "jcmsa") return Method::Jcmsa;
  if (text == "masked2dfft" || text == "masked") return Method::Masked2dFft;
  if (text == "plain2dfft" || text == "plain") return Method::Plain2dFft;
  throw std::invalid_argument("unknown method '" + text + "'");
}

// Optimal weights found by 14-fold cross validation at 0..10 dB, in the
// tabulated units (range weights are divided by range_lambda_scale before
// reaching the solver).
namespace lambda_table {
inline constexpr std::array<double, 11> kRangeS1{5401, 5601, 5001, 4601, 5401, 5201,
                                                  5001, 5601, 5601, 5601, 5201};
inline constexpr std::array<double, 11> kVelocityS1{2.16, 1.56, 1.54, 1.08, 1.2, 1.12,
                                                     0.74, 0.68, 1.16, 1.7, 1.5};
inline constexpr std::array<double, 11> kRangeS2{2501, 3501, 4501, 3001, 5001, 4001,
                                                  4801, 5101, 5201, 5601, 5101};
inline constexpr std::array<double, 11> kVelocityS2{1.32, 1.70, 1.44, 1.28, 0.92, 1.20,
                                                     1.10, 1.46, 1.70, 1.56, 1.54};
}  // namespace lambda_table

// Nearest tabulated SNR, clamped to [0, 10] dB. File scenarios use the
// static-occupancy table.
inline double table_lambda(ScenarioKind scenario, Axis axis, double snr_db) {
  const long idx = std::clamp(std::lround(snr_db), 0L, 10L);
  const bool switched = scenario == ScenarioKind::S2;
  if (axis == Axis::Range) {
    return switched ? lambda_table::kRangeS2[idx] : lambda_table::kRangeS1[idx];
  }
  return switched ? lambda_table::kVelocityS2[idx] : lambda_table::kVelocityS1[idx];
}

enum class LambdaSource { Fixed, Table, Tune };

struct LambdaChoice {
  LambdaSource source = LambdaSource::Table;
  double range = 0.0;     // Fixed only
  double velocity = 0.0;  // Fixed only
};

// "table", "tune", "VAL" (both axes) or "RANGE,VELOCITY".
inline LambdaChoice parse_lambda(const std::string& text) {
  if (text == "table") return {LambdaSource::Table};
  if (text == "tune") return {LambdaSource::Tune};
  auto number = [&](std::string_view part) {
    double v = 0.0;
    if (!detail::parse_number(detail::trim(part), v) || v < 0) {
      throw std::invalid_argument("lambda must be table, tune, VAL or RANGE,VELOCITY; got '" +
                                  text + "'");
    }
    return v;
  };
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    const double v = number(text);
    return {LambdaSource::Fixed, v, v};
  }
  return {LambdaSource::Fixed, number(std::string_view(text).substr(0, comma)),
          number(std::string_view(text).substr(comma + 1))};
}

struct TrialData {
  ChannelMatrix unprocessed;  // signal on occupied cells, noise everywhere
  ChannelMatrix masked;
};

inline TrialData simulate_trial(const SimulationConfig& cfg, const OccupancyMask& mask,
                                double snr_db, std::uint64_t seed) {
  TrialData data;
  data.unprocessed = synthesize_occupied(cfg, truth_from_config(cfg), mask, snr_db, seed);
  data.masked = apply_mask(data.unprocessed, mask);
  return data;
}

struct TunedLambdas {
  double range = 0.0;
  double velocity = 0.0;
};

inline TunedLambdas tune_lambdas(const SimulationConfig& cfg, const OccupancyMask& mask,
                                 const ChannelMatrix& masked) {
  const TargetTruth truth = truth_from_config(cfg);
  const auto range_problems = build_problem_set(masked, mask, cfg, Axis::Range, truth);
  const auto velocity_problems = build_problem_set(masked, mask, cfg, Axis::Velocity, truth);
  const auto r = kcv_select_lambda(range_problems, default_range_grid(), cfg.kcv_folds,
                                   axis_solver_config(cfg, Axis::Range, 0.0),
                                   cfg.range_lambda_scale);
  const auto v = kcv_select_lambda(velocity_problems, extended_velocity_grid(), cfg.kcv_folds,
                                   axis_solver_config(cfg, Axis::Velocity, 0.0),
                                   cfg.velocity_lambda_scale);
  return {r.best_lambda, v.best_lambda};
}

struct EstimateResult {
  EstimationReport range;
  EstimationReport velocity;
  double range_lambda = 0.0;     // NaN for the FFT baselines
  double velocity_lambda = 0.0;
};

inline EstimateResult run_method(const SimulationConfig& cfg, const OccupancyMask& mask,
                                 const TrialData& data, Method method, TunedLambdas lambdas) {
  EstimateResult out;
  out.range_lambda = out.velocity_lambda = std::nan("");
  switch (method) {
    case Method::Jcmsa:
      out.range_lambda = lambdas.range;
      out.velocity_lambda = lambdas.velocity;
      out.range = estimate_range_jcmsa(data.masked, mask, cfg, lambdas.range);
      out.velocity = estimate_velocity_jcmsa(data.masked, mask, cfg, lambdas.velocity);
      break;
    case Method::Masked2dFft:
      out.range = estimate_range_masked2dfft(data.masked, mask, cfg);
      out.velocity = estimate_velocity_masked2dfft(data.masked, mask, cfg);
      break;
    case Method::Plain2dFft: {
      auto plain = estimate_plain_2dfft(data.unprocessed, cfg);
      out.range = std::move(plain.range);
      out.velocity = std::move(plain.velocity);
      break;
    }
  }
  return out;
}

inline TunedLambdas resolve_lambdas(const LambdaChoice& choice, const SimulationConfig& cfg,
                                    const Scenario& scenario, const OccupancyMask& mask,
                                    const ChannelMatrix& calibration, double snr_db) {
  switch (choice.source) {
    case LambdaSource::Fixed: return {choice.range, choice.velocity};
    case LambdaSource::Table:
      return {table_lambda(scenario.kind, Axis::Range, snr_db),
              table_lambda(scenario.kind, Axis::Velocity, snr_db)};
    case LambdaSource::Tune: return tune_lambdas(cfg, mask, calibration);
  }
  return {};
}

// Full pipeline for one draw: mask, synthesize, mask the channel, estimate.
// With tune, lambda is cross-validated on this very draw.
inline EstimateResult run_estimate(const SimulationConfig& cfg, const Scenario& scenario,
                                   double snr_db, Method method, const LambdaChoice& lambda,
                                   std::uint64_t seed) {
  require_valid(cfg);
  const OccupancyMask mask = scenario_mask(scenario, cfg);
  const TrialData data = simulate_trial(cfg, mask, snr_db, seed);
  TunedLambdas lambdas{};
  if (method == Method::Jcmsa) {
    lambdas = resolve_lambdas(lambda, cfg, scenario, mask, data.masked, snr_db);
  }
  try {
    return run_method(cfg, mask, data, method, lambdas);
  } catch (const NoDataError& e) {
    throw NoDataError(std::string(to_string(method)) + " at " + detail::format_double(snr_db) +
                      " dB (seed " + std::to_string(seed) + ", range lambda " +
                      detail::format_double(lambdas.range) + ", velocity lambda " +
                      detail::format_double(lambdas.velocity) + "): " + e.what());
  }
}

struct SweepSpec {
  std::vector<double> snr_db_list{-30, -20, -10, 0, 10};
  int trials = 50;
  Scenario scenario;
  std::vector<Method> methods{Method::Jcmsa, Method::Masked2dFft, Method::Plain2dFft};
  LambdaChoice lambda;
  std::uint64_t base_seed = 0;
};

struct SweepRow {
  double snr_db = 0.0;
  Method method = Method::Jcmsa;
  int trials = 0;
  double range_rmse_m = 0.0;
  double velocity_rmse_mps = 0.0;
  double mean_range_psr_db = 0.0;  // over trials with finite PSR
  int range_psr_infinite = 0;
  double mean_velocity_psr_db = 0.0;
  int velocity_psr_infinite = 0;
  double mean_iterations = 0.0;
  int failures = 0;  // trials with an all-zero spectrum, scored as bin 1
  double range_lambda = 0.0;
  double velocity_lambda = 0.0;
};

// Seed of trial k at SNR index s; any single trial can be replayed alone.
inline std::uint64_t trial_seed(std::uint64_t base, std::size_t snr_index, int trial) {
  return mix_seed(mix_seed(base, snr_index), static_cast<std::uint64_t>(trial));
}

inline std::uint64_t calibration_seed(std::uint64_t base, std::size_t snr_index) {
  return mix_seed(mix_seed(base, snr_index), 0xCA11B4A7E5EEDull);
}

// Rows ordered by (snr in list order, method in list order). Every method
// sees the same draws.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, const SimulationConfig& cfg) {
  require_valid(cfg);
  if (spec.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (spec.snr_db_list.empty() || spec.methods.empty()) {
    throw std::invalid_argument("sweep needs at least one SNR and one method");
  }
  const OccupancyMask mask = scenario_mask(spec.scenario, cfg);
  const double true_range = cfg.target_range_m;
  const double true_velocity = cfg.target_velocity_mps;

  std::vector<SweepRow> rows;
  for (std::size_t s = 0; s < spec.snr_db_list.size(); ++s) {
    const double snr = spec.snr_db_list[s];
    TunedLambdas lambdas{};
    const bool needs_lambda =
        std::find(spec.methods.begin(), spec.methods.end(), Method::Jcmsa) != spec.methods.end();
    if (needs_lambda) {
      ChannelMatrix calibration;
      if (spec.lambda.source == LambdaSource::Tune) {
        calibration = simulate_trial(cfg, mask, snr, calibration_seed(spec.base_seed, s)).masked;
      }
      lambdas = resolve_lambdas(spec.lambda, cfg, spec.scenario, mask, calibration, snr);
    }

    struct Acc {
      std::vector<double> range, velocity;
      double range_psr = 0, velocity_psr = 0;
      int range_finite = 0, velocity_finite = 0, range_inf = 0, velocity_inf = 0;
      long iters = 0;
      int failures = 0;
    };
    std::vector<Acc> acc(spec.methods.size());

    for (int k = 0; k < spec.trials; ++k) {
      const TrialData data = simulate_trial(cfg, mask, snr, trial_seed(spec.base_seed, s, k));
      for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
        Acc& a = acc[mi];
        try {
          const EstimateResult res = run_method(cfg, mask, data, spec.methods[mi], lambdas);
          a.range.push_back(res.range.estimate);
          a.velocity.push_back(res.velocity.estimate);
          a.iters += res.range.solver_iters_total + res.velocity.solver_iters_total;
          if (std::isinf(res.range.psr_db)) {
            ++a.range_inf;
          } else {
            a.range_psr += res.range.psr_db;
            ++a.range_finite;
          }
          if (std::isinf(res.velocity.psr_db)) {
            ++a.velocity_inf;
          } else {
            a.velocity_psr += res.velocity.psr_db;
            ++a.velocity_finite;
          }
        } catch (const NoDataError&) {
          ++a.failures;
          a.range.push_back(range_from_bin(1, cfg));
          a.velocity.push_back(velocity_from_bin(1, cfg));
        }
      }
    }

    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
      const Acc& a = acc[mi];
      SweepRow row;
      row.snr_db = snr;
      row.method = spec.methods[mi];
      row.trials = spec.trials;
      row.range_rmse_m = rmse(a.range, true_range);
      row.velocity_rmse_mps = rmse(a.velocity, true_velocity);
      row.mean_range_psr_db = a.range_finite ? a.range_psr / a.range_finite : std::nan("");
      row.range_psr_infinite = a.range_inf;
      row.mean_velocity_psr_db =
          a.velocity_finite ? a.velocity_psr / a.velocity_finite : std::nan("");
      row.velocity_psr_infinite = a.velocity_inf;
      row.mean_iterations = static_cast<double>(a.iters) / spec.trials;
      row.failures = a.failures;
      const bool jcmsa = row.method == Method::Jcmsa;
      row.range_lambda = jcmsa ? lambdas.range : std::nan("");
      row.velocity_lambda = jcmsa ? lambdas.velocity : std::nan("");
      rows.push_back(row);
    }
  }
  return rows;
}

struct TableRow {
  std::string quantity;  // resolution | rmse_bound_upper | rmse_bound_lower | gain
  std::string method;    // jcmsa | masked2dfft | plain2dfft | "-"
  std::string axis;      // range | velocity
  std::string duration_mode;  // velocity rows only, "-" otherwise
  double noise_var = std::nan("");
  double fista_gain = std::nan("");
  double value = 0.0;
};

// Resolutions and RMSE bounds (both duration modes for the velocity axis),
// then the gain of every method over the sigma^2 x varpi grid.
inline std::vector<TableRow> run_tables(const SimulationConfig& cfg,
                                        const std::vector<double>& noise_vars,
                                        const std::vector<double>& fista_gains) {
  require_valid(cfg);
  std::vector<TableRow> rows;
  const std::array<Method, 3> methods{Method::Jcmsa, Method::Masked2dFft, Method::Plain2dFft};
  const std::array<DurationMode, 2> modes{DurationMode::SymbolTotal, DurationMode::Elementary};

  for (Method m : methods) {
    const Resolution res = resolution(cfg, m);
    rows.push_back({"resolution", std::string(to_string(m)), "range", "-", std::nan(""),
                    std::nan(""), res.range_m});
  }
  for (DurationMode mode : modes) {
    SimulationConfig c = cfg;
    c.velocity_duration_mode = mode;
    for (Method m : methods) {
      rows.push_back({"resolution", std::string(to_string(m)), "velocity",
                      std::string(to_string(mode)), std::nan(""), std::nan(""),
                      resolution(c, m).velocity_mps});
    }
  }

  const RmseBounds b = rmse_bounds(cfg);
  rows.push_back({"rmse_bound_upper", "-", "range", "-", std::nan(""), std::nan(""),
                  b.range_upper_m});
  rows.push_back({"rmse_bound_lower", "-", "range", "-", std::nan(""), std::nan(""),
                  b.range_lower_m});
  for (DurationMode mode : modes) {
    SimulationConfig c = cfg;
    c.velocity_duration_mode = mode;
    const RmseBounds bm = rmse_bounds(c);
    rows.push_back({"rmse_bound_upper", "-", "velocity", std::string(to_string(mode)),
                    std::nan(""), std::nan(""), bm.velocity_upper_mps});
    rows.push_back({"rmse_bound_lower", "-", "velocity", std::string(to_string(mode)),
                    std::nan(""), std::nan(""), bm.velocity_lower_mps});
  }

  for (double s2 : noise_vars) {
    for (double w : fista_gains) {
      const GainParams p{cfg.n_symbols, cfg.n_occupied, cfg.n_subcarriers, s2, w};
      for (Method m : methods) {
        rows.push_back({"gain", std::string(to_string(m)), "range", "-", s2, w, gain_range(p, m)});
        rows.push_back(
            {"gain", std::string(to_string(m)), "velocity", "-", s2, w, gain_velocity(p, m)});
      }
    }
  }
  return rows;
}

}  // namespace ncsense

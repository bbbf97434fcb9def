// ncsense: batch runner for single estimates, SNR sweeps, lambda tuning and
// the closed-form tables. Results go to --out (stdout if omitted) as CSV, or
// as JSON with --json.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ncsense/experiment.hpp"

namespace {

using namespace ncsense;
using nlohmann::ordered_json;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string duration_mode;
  std::string out;
  bool json = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "key = value configuration file");
  cmd->add_option("--set", o.overrides, "override one configuration key (k=v), repeatable");
  cmd->add_option("--duration-mode", o.duration_mode, "velocity mapping duration")
      ->check(CLI::IsMember({"symbol", "elementary"}));
  cmd->add_option("--out", o.out, "result file (default: stdout)");
  cmd->add_flag("--json", o.json, "write JSON instead of CSV");
}

SimulationConfig build_config(const CommonOptions& o) {
  SimulationConfig cfg = o.config_path.empty() ? default_config() : load_config(o.config_path);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_config_value(cfg, detail::trim(std::string_view(kv).substr(0, eq)),
                     detail::trim(std::string_view(kv).substr(eq + 1)), "--set");
  }
  if (o.duration_mode == "symbol") cfg.velocity_duration_mode = DurationMode::SymbolTotal;
  if (o.duration_mode == "elementary") cfg.velocity_duration_mode = DurationMode::Elementary;
  require_valid(cfg);
  return cfg;
}

// Opens --out, or stdout when empty.
class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw std::runtime_error("cannot write output file '" + path + "'");
    }
  }
  std::ostream& stream() { return path_.empty() ? std::cout : file_; }
  void close() {
    if (path_.empty()) return;
    file_.close();
    if (!file_) throw std::runtime_error("error while writing '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ofstream file_;
};

std::string num(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return detail::format_double(v);
}

ordered_json jnum(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

ordered_json config_json(const SimulationConfig& cfg) {
  std::istringstream in(config_to_string(cfg));
  ordered_json j = ordered_json::object();
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    j[std::string(detail::trim(std::string_view(line).substr(0, eq)))] =
        std::string(detail::trim(std::string_view(line).substr(eq + 1)));
  }
  return j;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& n : names) out.push_back(parse_method(n));
  return out;
}

// ---- estimate --------------------------------------------------------------

struct EstimateOptions {
  CommonOptions common;
  std::string scenario = "s1";
  double snr_db = 10.0;
  std::vector<std::string> methods{"jcmsa"};
  std::string lambda = "table";
  std::uint64_t seed = 0;
  bool emit_spectra = false;
};

void spectrum_file(const std::string& out, const std::string& method, const char* axis,
                   const PowerSpectrum& spectrum, const SimulationConfig& cfg, bool json) {
  const std::string path = out + "." + method + "." + axis + (json ? ".json" : ".csv");
  Output file(path);
  if (json) {
    ordered_json j;
    j["axis"] = axis;
    j["method"] = method;
    j["values"] = std::vector<double>(spectrum.values.begin(), spectrum.values.end());
    file.stream() << j.dump(2) << '\n';
  } else {
    write_spectrum_csv(file.stream(), spectrum, cfg);
  }
  file.close();
}

int run_estimate_cmd(const EstimateOptions& o) {
  const SimulationConfig cfg = build_config(o.common);
  const Scenario scenario = parse_scenario(o.scenario);
  const LambdaChoice lambda = parse_lambda(o.lambda);
  if (o.emit_spectra && o.common.out.empty()) {
    throw std::invalid_argument("--emit-spectra needs --out to name the spectrum files");
  }

  std::vector<std::pair<Method, EstimateResult>> results;
  for (Method m : parse_methods(o.methods)) {
    results.emplace_back(m, run_estimate(cfg, scenario, o.snr_db, m, lambda, o.seed));
  }

  Output out(o.common.out);
  if (o.common.json) {
    ordered_json j;
    j["scenario"] = to_string(scenario);
    j["snr_db"] = o.snr_db;
    j["seed"] = o.seed;
    j["config"] = config_json(cfg);
    j["results"] = ordered_json::array();
    for (const auto& [m, r] : results) {
      for (const auto* rep : {&r.range, &r.velocity}) {
        const bool range = rep == &r.range;
        j["results"].push_back({{"method", to_string(m)},
                                {"axis", range ? "range" : "velocity"},
                                {"estimate", rep->estimate},
                                {"peak_bin", rep->peak_bin},
                                {"psr_db", jnum(rep->psr_db)},
                                {"iterations", rep->solver_iters_total},
                                {"lambda", jnum(range ? r.range_lambda : r.velocity_lambda)}});
      }
    }
    out.stream() << j.dump(2) << '\n';
  } else {
    out.stream() << "method,axis,estimate,peak_bin,psr_db,iterations,lambda\n";
    for (const auto& [m, r] : results) {
      out.stream() << to_string(m) << ",range," << num(r.range.estimate) << ','
                   << r.range.peak_bin << ',' << num(r.range.psr_db) << ','
                   << r.range.solver_iters_total << ',' << num(r.range_lambda) << '\n';
      out.stream() << to_string(m) << ",velocity," << num(r.velocity.estimate) << ','
                   << r.velocity.peak_bin << ',' << num(r.velocity.psr_db) << ','
                   << r.velocity.solver_iters_total << ',' << num(r.velocity_lambda) << '\n';
    }
  }
  out.close();

  if (o.emit_spectra) {
    for (const auto& [m, r] : results) {
      const std::string name(to_string(m));
      spectrum_file(o.common.out, name, "range", r.range.spectrum, cfg, o.common.json);
      spectrum_file(o.common.out, name, "velocity", r.velocity.spectrum, cfg, o.common.json);
    }
  }
  return 0;
}

// ---- sweep -----------------------------------------------------------------

struct SweepOptions {
  CommonOptions common;
  std::string scenario = "s1";
  std::vector<double> snr_db{-30, -20, -10, 0, 10};
  int trials = 50;
  std::vector<std::string> methods{"jcmsa", "masked2dfft", "plain2dfft"};
  std::string lambda = "table";
  std::uint64_t seed = 0;
};

int run_sweep_cmd(const SweepOptions& o) {
  const SimulationConfig cfg = build_config(o.common);
  SweepSpec spec;
  spec.snr_db_list = o.snr_db;
  spec.trials = o.trials;
  spec.scenario = parse_scenario(o.scenario);
  spec.methods = parse_methods(o.methods);
  spec.lambda = parse_lambda(o.lambda);
  spec.base_seed = o.seed;

  // Open before the (long) run so a bad path fails fast.
  Output out(o.common.out);
  const auto rows = run_sweep(spec, cfg);

  if (o.common.json) {
    ordered_json j;
    j["scenario"] = to_string(spec.scenario);
    j["trials"] = spec.trials;
    j["seed"] = spec.base_seed;
    j["config"] = config_json(cfg);
    j["rows"] = ordered_json::array();
    for (const auto& r : rows) {
      j["rows"].push_back({{"snr_db", r.snr_db},
                           {"method", to_string(r.method)},
                           {"trials", r.trials},
                           {"range_rmse_m", r.range_rmse_m},
                           {"velocity_rmse_mps", r.velocity_rmse_mps},
                           {"mean_range_psr_db", jnum(r.mean_range_psr_db)},
                           {"range_psr_infinite", r.range_psr_infinite},
                           {"mean_velocity_psr_db", jnum(r.mean_velocity_psr_db)},
                           {"velocity_psr_infinite", r.velocity_psr_infinite},
                           {"mean_iterations", r.mean_iterations},
                           {"failures", r.failures},
                           {"range_lambda", jnum(r.range_lambda)},
                           {"velocity_lambda", jnum(r.velocity_lambda)}});
    }
    out.stream() << j.dump(2) << '\n';
  } else {
    out.stream() << "snr_db,method,trials,range_rmse_m,velocity_rmse_mps,mean_range_psr_db,"
                    "range_psr_infinite,mean_velocity_psr_db,velocity_psr_infinite,"
                    "mean_iterations,failures,range_lambda,velocity_lambda\n";
    for (const auto& r : rows) {
      out.stream() << num(r.snr_db) << ',' << to_string(r.method) << ',' << r.trials << ','
                   << num(r.range_rmse_m) << ',' << num(r.velocity_rmse_mps) << ','
                   << num(r.mean_range_psr_db) << ',' << r.range_psr_infinite << ','
                   << num(r.mean_velocity_psr_db) << ',' << r.velocity_psr_infinite << ','
                   << num(r.mean_iterations) << ',' << r.failures << ','
                   << num(r.range_lambda) << ',' << num(r.velocity_lambda) << '\n';
    }
  }
  out.close();
  return 0;
}

// ---- tune ------------------------------------------------------------------

struct TuneOptions {
  CommonOptions common;
  std::string scenario = "s1";
  double snr_db = 10.0;
  std::uint64_t seed = 0;
  std::string axis = "both";
  std::vector<double> range_grid;     // start,stop,step
  std::vector<double> velocity_grid;  // start,stop,step
  bool emit_folds = false;
};

LambdaGrid grid_from(const std::vector<double>& v, LambdaGrid fallback) {
  if (v.empty()) return fallback;
  if (v.size() != 3) throw std::invalid_argument("grid expects start,stop,step");
  return {v[0], v[1], v[2], fallback.axis};
}

int run_tune_cmd(const TuneOptions& o) {
  const SimulationConfig cfg = build_config(o.common);
  const Scenario scenario = parse_scenario(o.scenario);
  const OccupancyMask mask = scenario_mask(scenario, cfg);
  const TrialData data = simulate_trial(cfg, mask, o.snr_db, o.seed);
  const TargetTruth truth = truth_from_config(cfg);
  if (o.emit_folds && o.common.out.empty()) {
    throw std::invalid_argument("--emit-folds needs --out to name the fold files");
  }

  struct AxisRun {
    Axis axis;
    KcvOutcome kcv;
  };
  std::vector<AxisRun> runs;
  for (Axis axis : {Axis::Range, Axis::Velocity}) {
    if (o.axis != "both" && o.axis != to_string(axis)) continue;
    const bool range = axis == Axis::Range;
    const LambdaGrid grid = range ? grid_from(o.range_grid, default_range_grid())
                                  : grid_from(o.velocity_grid, extended_velocity_grid());
    const auto problems = build_problem_set(data.masked, mask, cfg, axis, truth);
    runs.push_back({axis, kcv_select_lambda(problems, grid, cfg.kcv_folds,
                                            axis_solver_config(cfg, axis, 0.0),
                                            range ? cfg.range_lambda_scale
                                                  : cfg.velocity_lambda_scale)});
  }

  // Peak bin reached with the selected weight, as a self-consistency check.
  // Zero when that weight wipes out every column (row).
  auto achieved_bin = [&](const AxisRun& run) {
    try {
      return run.axis == Axis::Range
                 ? estimate_range_jcmsa(data.masked, mask, cfg, run.kcv.best_lambda).peak_bin
                 : estimate_velocity_jcmsa(data.masked, mask, cfg, run.kcv.best_lambda).peak_bin;
    } catch (const NoDataError&) {
      return 0;
    }
  };

  Output out(o.common.out);
  if (o.common.json) {
    ordered_json j;
    j["scenario"] = to_string(scenario);
    j["snr_db"] = o.snr_db;
    j["seed"] = o.seed;
    j["results"] = ordered_json::array();
    for (const auto& run : runs) {
      j["results"].push_back({{"axis", to_string(run.axis)},
                              {"best_lambda", run.kcv.best_lambda},
                              {"peak_bin", achieved_bin(run)},
                              {"lambdas", run.kcv.lambdas},
                              {"scores", run.kcv.scores}});
    }
    out.stream() << j.dump(2) << '\n';
  } else {
    out.stream() << "axis,best_lambda,peak_bin\n";
    for (const auto& run : runs) {
      out.stream() << to_string(run.axis) << ',' << num(run.kcv.best_lambda) << ','
                   << achieved_bin(run) << '\n';
    }
  }
  out.close();

  if (o.emit_folds) {
    for (const auto& run : runs) {
      Output folds(o.common.out + ".kcv." + std::string(to_string(run.axis)) + ".csv");
      write_kcv_csv(folds.stream(), run.kcv);
      folds.close();
    }
  }
  return 0;
}

// ---- tables ----------------------------------------------------------------

struct TablesOptions {
  CommonOptions common;
  std::vector<double> noise_vars{1.0};
  std::vector<double> fista_gains{0.0, 1.0, 10.0};
  bool no_gains = false;
};

int run_tables_cmd(const TablesOptions& o) {
  const SimulationConfig cfg = build_config(o.common);
  const auto rows = o.no_gains ? run_tables(cfg, {}, {})
                               : run_tables(cfg, o.noise_vars, o.fista_gains);
  Output out(o.common.out);
  if (o.common.json) {
    ordered_json j = ordered_json::array();
    for (const auto& r : rows) {
      j.push_back({{"quantity", r.quantity},
                   {"method", r.method},
                   {"axis", r.axis},
                   {"duration_mode", r.duration_mode},
                   {"noise_var", jnum(r.noise_var)},
                   {"fista_gain", jnum(r.fista_gain)},
                   {"value", r.value}});
    }
    out.stream() << j.dump(2) << '\n';
  } else {
    out.stream() << "quantity,method,axis,duration_mode,noise_var,fista_gain,value\n";
    for (const auto& r : rows) {
      out.stream() << r.quantity << ',' << r.method << ',' << r.axis << ',' << r.duration_mode
                   << ',' << num(r.noise_var) << ',' << num(r.fista_gain) << ','
                   << num(r.value) << '\n';
    }
  }
  out.close();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NC-OFDM ISAC range/velocity estimation experiments"};
  app.require_subcommand(1);

  EstimateOptions est;
  auto* c_est = app.add_subcommand("estimate", "one draw through the full pipeline");
  add_common(c_est, est.common);
  c_est->add_option("--scenario", est.scenario, "s1 | s2 | file:PATH");
  c_est->add_option("--snr-db", est.snr_db, "SNR in dB");
  c_est->add_option("--method", est.methods, "jcmsa,masked2dfft,plain2dfft")->delimiter(',');
  c_est->add_option("--lambda", est.lambda, "VAL | RANGE,VELOCITY | table | tune");
  c_est->add_option("--seed", est.seed, "noise seed");
  c_est->add_flag("--emit-spectra", est.emit_spectra, "also write OUT.<method>.<axis>.csv");

  SweepOptions sw;
  auto* c_sw = app.add_subcommand("sweep", "Monte-Carlo RMSE over SNR");
  add_common(c_sw, sw.common);
  c_sw->add_option("--scenario", sw.scenario, "s1 | s2 | file:PATH");
  c_sw->add_option("--snr-db", sw.snr_db, "comma-separated SNRs in dB")->delimiter(',');
  c_sw->add_option("--trials", sw.trials, "trials per SNR")->check(CLI::PositiveNumber);
  c_sw->add_option("--method", sw.methods, "jcmsa,masked2dfft,plain2dfft")->delimiter(',');
  c_sw->add_option("--lambda", sw.lambda, "VAL | RANGE,VELOCITY | table | tune");
  c_sw->add_option("--seed", sw.seed, "base seed");

  TuneOptions tn;
  auto* c_tn = app.add_subcommand("tune", "cross-validated lambda on one draw");
  add_common(c_tn, tn.common);
  c_tn->add_option("--scenario", tn.scenario, "s1 | s2 | file:PATH");
  c_tn->add_option("--snr-db", tn.snr_db, "SNR in dB");
  c_tn->add_option("--seed", tn.seed, "noise seed");
  c_tn->add_option("--axis", tn.axis, "range | velocity | both")
      ->check(CLI::IsMember({"range", "velocity", "both"}));
  c_tn->add_option("--range-grid", tn.range_grid, "start,stop,step")->delimiter(',');
  c_tn->add_option("--velocity-grid", tn.velocity_grid, "start,stop,step")->delimiter(',');
  c_tn->add_flag("--emit-folds", tn.emit_folds, "also write OUT.kcv.<axis>.csv");

  TablesOptions tb;
  auto* c_tb = app.add_subcommand("tables", "resolutions, RMSE bounds and SNR gains");
  add_common(c_tb, tb.common);
  c_tb->add_option("--noise-var", tb.noise_vars, "sigma^2 grid")->delimiter(',');
  c_tb->add_option("--fista-gain", tb.fista_gains, "varpi grid")->delimiter(',');
  c_tb->add_flag("--no-gains", tb.no_gains, "emit resolutions and bounds only");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_est) return run_estimate_cmd(est);
    if (*c_sw) return run_sweep_cmd(sw);
    if (*c_tn) return run_tune_cmd(tn);
    if (*c_tb) return run_tables_cmd(tb);
  } catch (const std::exception& e) {
    std::cerr << "ncsense: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

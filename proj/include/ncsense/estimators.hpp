#pragma once

// Range and velocity estimators:
//  - JCMSA: per non-zero column (row), reconstruct the sparse spectrum from
//    the valid samples with FISTA, accumulate magnitudes non-coherently,
//    normalize by the count and pick the peak.
//  - masked 2D-FFT: same accumulation, but the spectrum of each zero-filled
//    column (row) is taken directly.
//  - plain 2D-FFT: argmax of the 2D periodogram of the unprocessed matrix.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ncsense/channel.hpp"
#include "ncsense/config.hpp"
#include "ncsense/errors.hpp"
#include "ncsense/fista.hpp"
#include "ncsense/fourier.hpp"
#include "ncsense/metrics.hpp"
#include "ncsense/occupancy.hpp"

namespace ncsense {

struct EstimationReport {
  double estimate = 0.0;  // meters or m/s
  int peak_bin = 1;       // 1-based
  PowerSpectrum spectrum;
  double psr_db = 0.0;    // kInfinitePsr when sidelobes vanish
  int solver_iters_total = 0;
  Method method = Method::Jcmsa;
};

// Index of the global maximum, 1-based; ties go to the smallest index.
inline int peak_search(const PowerSpectrum& spectrum) {
  if (spectrum.size() == 0) throw std::invalid_argument("peak search on an empty spectrum");
  int best = 0;
  for (int i = 1; i < spectrum.size(); ++i) {
    if (spectrum.values[i] > spectrum.values[best]) best = i;
  }
  return best + 1;
}

inline double range_from_bin(int k0, const SimulationConfig& cfg) {
  return cfg.range_bin_width() * (k0 - 1);
}

inline double velocity_from_bin(int l0, const SimulationConfig& cfg) {
  return cfg.velocity_bin_width() * (l0 - 1);
}

// Solver settings for one axis: `lambda` is given in the tabulated units and
// divided by the axis scale from the configuration.
inline FistaConfig axis_solver_config(const SimulationConfig& cfg, Axis axis, double lambda) {
  FistaConfig out;
  const double scale = axis == Axis::Range ? cfg.range_lambda_scale : cfg.velocity_lambda_scale;
  out.lambda = lambda / scale;
  out.max_iters = cfg.fista_max_iters;
  out.error_tol = cfg.fista_error_tol;
  return out;
}

namespace detail {

inline bool column_is_zero(const ChannelMatrix& chan, int m) {
  return (chan.data.col(m).array() == cplx(0.0, 0.0)).all();
}

inline bool row_is_zero(const ChannelMatrix& chan, int n) {
  return (chan.data.row(n).array() == cplx(0.0, 0.0)).all();
}

inline void check_masked(const ChannelMatrix& chan, const OccupancyMask& mask) {
  if (chan.subcarriers() != mask.subcarriers() || chan.symbols() != mask.symbols()) {
    throw DimensionError("channel and mask dimensions differ");
  }
}

inline EstimationReport finish(RVector accumulated, int count, Axis axis, Method method,
                               int iters, const SimulationConfig& cfg) {
  const char* what = axis == Axis::Range ? "range" : "velocity";
  if (count == 0) {
    throw NoDataError(std::string("no non-zero ") +
                      (axis == Axis::Range ? "columns" : "rows") + " to estimate " + what +
                      " from");
  }
  EstimationReport report;
  report.method = method;
  report.solver_iters_total = iters;
  report.spectrum = PowerSpectrum{accumulated / static_cast<double>(count), axis, count};
  if (!(report.spectrum.values.maxCoeff() > 0.0)) {
    throw NoDataError(std::string("reconstructed ") + what +
                      " spectrum is identically zero (regularization too strong?)");
  }
  report.peak_bin = peak_search(report.spectrum);
  report.estimate = axis == Axis::Range ? range_from_bin(report.peak_bin, cfg)
                                        : velocity_from_bin(report.peak_bin, cfg);
  report.psr_db = report.spectrum.size() > 3 ? psr_db(report.spectrum) : 0.0;
  return report;
}

// Lipschitz constants depend only on the selection pattern; scenarios reuse
// a handful of patterns, so estimate each once.
class LipschitzCache {
 public:
  explicit LipschitzCache(const FistaConfig& base) : base_(base) {}

  FistaConfig config_for(const SensingOperator& op) {
    FistaConfig cfg = base_;
    if (cfg.lipschitz) return cfg;
    auto [it, inserted] = cache_.try_emplace(op.selection().indices, 0.0);
    if (inserted) it->second = estimate_lipschitz(op, 50, base_.lipschitz_seed);
    cfg.lipschitz = it->second;
    return cfg;
  }

 private:
  FistaConfig base_;
  std::map<std::vector<int>, double> cache_;
};

}  // namespace detail

inline EstimationReport estimate_range_jcmsa(const ChannelMatrix& chan, const OccupancyMask& mask,
                                             const SimulationConfig& cfg,
                                             const FistaConfig& solver) {
  detail::check_masked(chan, mask);
  detail::LipschitzCache lipschitz(solver);
  RVector acc = RVector::Zero(chan.subcarriers());
  int count = 0;
  int iters = 0;
  for (int m = 0; m < chan.symbols(); ++m) {
    if (detail::column_is_zero(chan, m)) continue;
    SelectionIndex sel = column_selection(mask, m);
    const CVector observed = gather(chan.data.col(m), sel);
    const SensingOperator op = range_sensing_operator(mask_column(mask, m), std::move(sel));
    const FistaResult res = fista_solve(op, observed, lipschitz.config_for(op));
    acc += res.solution.cwiseAbs();
    iters += res.iterations;
    ++count;
  }
  return detail::finish(std::move(acc), count, Axis::Range, Method::Jcmsa, iters, cfg);
}

inline EstimationReport estimate_velocity_jcmsa(const ChannelMatrix& chan,
                                                const OccupancyMask& mask,
                                                const SimulationConfig& cfg,
                                                const FistaConfig& solver) {
  detail::check_masked(chan, mask);
  detail::LipschitzCache lipschitz(solver);
  RVector acc = RVector::Zero(chan.symbols());
  int count = 0;
  int iters = 0;
  for (int n = 0; n < chan.subcarriers(); ++n) {
    if (detail::row_is_zero(chan, n)) continue;
    SelectionIndex sel = row_selection(mask, n);
    const CVector observed = gather(chan.data.row(n).transpose(), sel);
    const SensingOperator op = velocity_sensing_operator(mask_row(mask, n), std::move(sel));
    const FistaResult res = fista_solve(op, observed, lipschitz.config_for(op));
    acc += res.solution.cwiseAbs();
    iters += res.iterations;
    ++count;
  }
  return detail::finish(std::move(acc), count, Axis::Velocity, Method::Jcmsa, iters, cfg);
}

// Convenience overloads taking lambda in tabulated units.
inline EstimationReport estimate_range_jcmsa(const ChannelMatrix& chan, const OccupancyMask& mask,
                                             const SimulationConfig& cfg, double lambda) {
  return estimate_range_jcmsa(chan, mask, cfg, axis_solver_config(cfg, Axis::Range, lambda));
}

inline EstimationReport estimate_velocity_jcmsa(const ChannelMatrix& chan,
                                                const OccupancyMask& mask,
                                                const SimulationConfig& cfg, double lambda) {
  return estimate_velocity_jcmsa(chan, mask, cfg,
                                 axis_solver_config(cfg, Axis::Velocity, lambda));
}

inline EstimationReport estimate_range_masked2dfft(const ChannelMatrix& chan,
                                                   const OccupancyMask& mask,
                                                   const SimulationConfig& cfg) {
  detail::check_masked(chan, mask);
  RVector acc = RVector::Zero(chan.subcarriers());
  int count = 0;
  for (int m = 0; m < chan.symbols(); ++m) {
    if (detail::column_is_zero(chan, m)) continue;
    acc += idft(chan.data.col(m)).cwiseAbs();
    ++count;
  }
  return detail::finish(std::move(acc), count, Axis::Range, Method::Masked2dFft, 0, cfg);
}

inline EstimationReport estimate_velocity_masked2dfft(const ChannelMatrix& chan,
                                                      const OccupancyMask& mask,
                                                      const SimulationConfig& cfg) {
  detail::check_masked(chan, mask);
  RVector acc = RVector::Zero(chan.symbols());
  int count = 0;
  for (int n = 0; n < chan.subcarriers(); ++n) {
    if (detail::row_is_zero(chan, n)) continue;
    acc += dft(chan.data.row(n).transpose()).cwiseAbs();
    ++count;
  }
  return detail::finish(std::move(acc), count, Axis::Velocity, Method::Masked2dFft, 0, cfg);
}

struct PlainEstimate {
  EstimationReport range;
  EstimationReport velocity;
};

// Joint argmax of the 2D periodogram (ties: smallest range bin, then
// smallest Doppler bin). Reported spectra are the periodogram slices through
// the peak.
inline PlainEstimate estimate_plain_2dfft(const ChannelMatrix& chan, const SimulationConfig& cfg) {
  const RMatrix power = periodogram_2d(chan);
  int best_r = 0, best_v = 0;
  for (int r = 0; r < power.rows(); ++r) {
    for (int v = 0; v < power.cols(); ++v) {
      if (power(r, v) > power(best_r, best_v)) {
        best_r = r;
        best_v = v;
      }
    }
  }
  if (!(power(best_r, best_v) > 0.0)) throw NoDataError("channel matrix is identically zero");

  auto slice_report = [&](RVector values, Axis axis, int bin) {
    EstimationReport rep;
    rep.method = Method::Plain2dFft;
    rep.spectrum = PowerSpectrum{std::move(values), axis, 1};
    rep.peak_bin = bin + 1;
    rep.estimate = axis == Axis::Range ? range_from_bin(rep.peak_bin, cfg)
                                       : velocity_from_bin(rep.peak_bin, cfg);
    rep.psr_db = rep.spectrum.size() > 3 ? psr_db(rep.spectrum) : 0.0;
    return rep;
  };
  return PlainEstimate{slice_report(power.col(best_v), Axis::Range, best_r),
                       slice_report(power.row(best_r).transpose(), Axis::Velocity, best_v)};
}

// Spectrum CSV: bin (1-based), value, physical axis value.
inline void write_spectrum_csv(std::ostream& out, const PowerSpectrum& spectrum,
                               const SimulationConfig& cfg) {
  out << "bin,value," << (spectrum.axis == Axis::Range ? "range_m" : "velocity_mps") << '\n';
  for (int i = 0; i < spectrum.size(); ++i) {
    const double phys =
        spectrum.axis == Axis::Range ? range_from_bin(i + 1, cfg) : velocity_from_bin(i + 1, cfg);
    out << i + 1 << ',' << detail::format_double(spectrum.values[i]) << ','
        << detail::format_double(phys) << '\n';
  }
}

}  // namespace ncsense

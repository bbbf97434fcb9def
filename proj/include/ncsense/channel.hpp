#pragma once

// Divided channel information matrix for one moving point target.
//
// Entry (n, m) is the received symbol on subcarrier n of symbol m divided by
// the transmitted one: alpha * d_r(n) * d_v(m) + noise. The division removes
// the modulation symbols exactly, so they are never drawn.

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include "ncsense/config.hpp"
#include "ncsense/errors.hpp"
#include "ncsense/linalg.hpp"
#include "ncsense/occupancy.hpp"

namespace ncsense {

enum class ChannelKind { Unprocessed, Masked };

struct ChannelMatrix {
  CMatrix data;  // subcarriers x symbols
  ChannelKind kind = ChannelKind::Unprocessed;

  int subcarriers() const { return static_cast<int>(data.rows()); }
  int symbols() const { return static_cast<int>(data.cols()); }
};

struct TargetTruth {
  double range_m = 117.0;
  double velocity_mps = 13.0;
  cplx amplitude{1.0, 0.0};
};

inline TargetTruth truth_from_config(const SimulationConfig& cfg) {
  return TargetTruth{cfg.target_range_m, cfg.target_velocity_mps, {1.0, 0.0}};
}

// Range phasor along the subcarrier axis; entry n carries the phase of the
// paper's 1-based subcarrier n+1.
inline CVector steering_range(const SimulationConfig& cfg, double range_m) {
  CVector out(cfg.n_subcarriers);
  const double delay = 2.0 * range_m / cfg.light_speed_mps;
  for (int n = 0; n < cfg.n_subcarriers; ++n) {
    const double phase = -2.0 * std::numbers::pi * (n + 1) * cfg.subcarrier_spacing_hz * delay;
    out[n] = std::polar(1.0, phase);
  }
  return out;
}

inline CVector steering_range(const SimulationConfig& cfg) {
  return steering_range(cfg, cfg.target_range_m);
}

// Doppler phasor along the symbol axis. Always advances by the full symbol
// duration T_sym; the duration mode only affects the bin-to-velocity mapping.
inline CVector steering_velocity(const SimulationConfig& cfg, double velocity_mps) {
  CVector out(cfg.n_symbols);
  const double doppler = 2.0 * velocity_mps * cfg.carrier_freq_hz / cfg.light_speed_mps;
  for (int m = 0; m < cfg.n_symbols; ++m) {
    const double phase = 2.0 * std::numbers::pi * (m + 1) * cfg.symbol_duration_s * doppler;
    out[m] = std::polar(1.0, phase);
  }
  return out;
}

inline CVector steering_velocity(const SimulationConfig& cfg) {
  return steering_velocity(cfg, cfg.target_velocity_mps);
}

// Per-entry noise variance giving |alpha|^2 / var = 10^(snr_db / 10).
inline double noise_variance(cplx amplitude, double snr_db) {
  return std::norm(amplitude) * std::pow(10.0, -snr_db / 10.0);
}

namespace detail {

inline CMatrix complex_gaussian(int rows, int cols, double variance, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  CMatrix noise(rows, cols);
  for (int m = 0; m < cols; ++m) {
    for (int n = 0; n < rows; ++n) {
      const double re = normal(rng);
      const double im = normal(rng);
      noise(n, m) = cplx(re, im);
    }
  }
  return noise;
}

inline ChannelMatrix synthesize_where(const SimulationConfig& cfg, const TargetTruth& truth,
                                      const OccupancyMask* mask, double snr_db,
                                      std::uint64_t seed) {
  if (!std::isfinite(snr_db)) throw std::invalid_argument("snr_db must be finite");
  if (truth.amplitude == cplx(0.0, 0.0)) throw std::invalid_argument("target amplitude is zero");
  const CVector dr = steering_range(cfg, truth.range_m);
  const CVector dv = steering_velocity(cfg, truth.velocity_mps);
  ChannelMatrix out;
  out.data = complex_gaussian(cfg.n_subcarriers, cfg.n_symbols,
                              noise_variance(truth.amplitude, snr_db), seed);
  for (int m = 0; m < cfg.n_symbols; ++m) {
    for (int n = 0; n < cfg.n_subcarriers; ++n) {
      if (mask == nullptr || mask->at(n, m)) out.data(n, m) += truth.amplitude * (dr[n] * dv[m]);
    }
  }
  return out;
}

}  // namespace detail

// Signal on every cell plus circular complex Gaussian noise.
inline ChannelMatrix synthesize(const SimulationConfig& cfg, const TargetTruth& truth,
                                double snr_db, std::uint64_t seed) {
  return detail::synthesize_where(cfg, truth, nullptr, snr_db, seed);
}

// What a receiver sees on a non-continuous spectrum: signal only where the
// transmitter occupied the subcarrier, noise everywhere. Occupied cells are
// bit-identical to synthesize() for the same seed.
inline ChannelMatrix synthesize_occupied(const SimulationConfig& cfg, const TargetTruth& truth,
                                         const OccupancyMask& mask, double snr_db,
                                         std::uint64_t seed) {
  if (mask.subcarriers() != cfg.n_subcarriers || mask.symbols() != cfg.n_symbols) {
    throw DimensionError("mask dimensions do not match the configuration");
  }
  return detail::synthesize_where(cfg, truth, &mask, snr_db, seed);
}

inline ChannelMatrix apply_mask(const ChannelMatrix& chan, const OccupancyMask& mask) {
  if (chan.subcarriers() != mask.subcarriers() || chan.symbols() != mask.symbols()) {
    throw DimensionError("channel is " + std::to_string(chan.subcarriers()) + "x" +
                         std::to_string(chan.symbols()) + " but mask is " +
                         std::to_string(mask.subcarriers()) + "x" +
                         std::to_string(mask.symbols()));
  }
  ChannelMatrix out{chan.data, ChannelKind::Masked};
  for (int m = 0; m < chan.symbols(); ++m) {
    for (int n = 0; n < chan.subcarriers(); ++n) {
      if (!mask.at(n, m)) out.data(n, m) = cplx(0.0, 0.0);
    }
  }
  return out;
}

// Debug dump: one line per subcarrier, "re,im" pairs per symbol.
inline void write_channel_csv(std::ostream& out, const ChannelMatrix& chan) {
  out.precision(17);
  for (int n = 0; n < chan.subcarriers(); ++n) {
    for (int m = 0; m < chan.symbols(); ++m) {
      if (m) out << ',';
      out << chan.data(n, m).real() << ',' << chan.data(n, m).imag();
    }
    out << '\n';
  }
}

}  // namespace ncsense

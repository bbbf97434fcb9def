#pragma once

// Figures of merit: sample SNR, peak-to-sidelobe ratio, RMSE, the closed-form
// SNR gains of the three processing chains, resolutions and RMSE bounds.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string_view>

#include "ncsense/config.hpp"
#include "ncsense/linalg.hpp"

namespace ncsense {

enum class Axis { Range, Velocity };

enum class Method { Jcmsa, Masked2dFft, Plain2dFft };

inline std::string_view to_string(Axis a) { return a == Axis::Range ? "range" : "velocity"; }

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::Jcmsa: return "jcmsa";
    case Method::Masked2dFft: return "masked2dfft";
    case Method::Plain2dFft: return "plain2dfft";
  }
  return "?";
}

// Accumulated, count-normalized magnitude spectrum.
struct PowerSpectrum {
  RVector values;
  Axis axis = Axis::Range;
  int contributing = 1;

  int size() const { return static_cast<int>(values.size()); }
};

inline constexpr double kInfinitePsr = std::numeric_limits<double>::infinity();

inline double snr_of_sequence(const CVector& signal, const CVector& noise) {
  if (signal.size() != noise.size() || signal.size() == 0) {
    throw std::invalid_argument("signal and noise must be non-empty and of equal length");
  }
  const double noise_power = noise.squaredNorm() / static_cast<double>(noise.size());
  if (!(noise_power > 0)) throw std::invalid_argument("noise power is zero");
  return (signal.squaredNorm() / static_cast<double>(signal.size())) / noise_power;
}

// 10 log10(peak / largest value more than `exclusion` bins (circularly) away
// from the peak). Infinite when everything outside the zone is below 1e-12
// of the peak.
inline double psr_db(const PowerSpectrum& spectrum, int exclusion = 1) {
  const int n = spectrum.size();
  if (exclusion < 0 || n <= 2 * exclusion + 1) {
    throw std::invalid_argument("spectrum too short for the PSR exclusion zone");
  }
  Eigen::Index peak_at = 0;
  const double peak = spectrum.values.maxCoeff(&peak_at);
  if (!(peak > 0)) throw std::invalid_argument("PSR of an all-zero spectrum");
  double side = 0.0;
  for (int i = 0; i < n; ++i) {
    const int d = std::abs(i - static_cast<int>(peak_at));
    if (std::min(d, n - d) <= exclusion) continue;
    side = std::max(side, spectrum.values[i]);
  }
  if (side < 1e-12 * peak) return kInfinitePsr;
  return 10.0 * std::log10(peak / side);
}

inline double rmse(std::span<const double> estimates, double truth) {
  if (estimates.empty()) throw std::invalid_argument("rmse of an empty sample");
  double acc = 0.0;
  for (double e : estimates) acc += (e - truth) * (e - truth);
  return std::sqrt(acc / static_cast<double>(estimates.size()));
}

struct GainParams {
  int m_sym = 14;
  int n_occ = 256;
  int n_sub = 512;
  double noise_var = 1.0;   // sigma^2
  double fista_gain = 0.0;  // varpi

  bool valid() const {
    return m_sym >= 1 && n_occ >= 1 && n_sub >= 1 && n_occ <= n_sub && noise_var > 0 &&
           fista_gain >= 0;
  }
};

namespace detail {
inline void require_valid(const GainParams& p) {
  if (!p.valid()) throw std::invalid_argument("invalid gain parameters");
}
}  // namespace detail

// Output SNR of the range processing chain for a static occupancy.
inline double gain_range(const GainParams& p, Method method) {
  detail::require_valid(p);
  const double m = p.m_sym, n = p.n_occ, nc = p.n_sub, s2 = p.noise_var;
  switch (method) {
    case Method::Jcmsa: return std::sqrt(m) * (n / s2 + p.fista_gain);
    case Method::Masked2dFft: return std::sqrt(m) * n / s2;
    case Method::Plain2dFft: return n * n / (nc * s2);
  }
  return 0.0;
}

inline double gain_velocity(const GainParams& p, Method method) {
  detail::require_valid(p);
  const double m = p.m_sym, n = p.n_occ, s2 = p.noise_var;
  switch (method) {
    case Method::Jcmsa: return std::sqrt(n) * (m / s2 + p.fista_gain);
    case Method::Masked2dFft: return std::sqrt(n) * m / s2;
    case Method::Plain2dFft: return m / s2;
  }
  return 0.0;
}

struct Resolution {
  double range_m = 0.0;
  double velocity_mps = 0.0;
};

// JCMSA reconstructs the full band and frame, so it keeps the full-grid
// resolution. Both FFT baselines are quoted for the half-occupied extreme
// cases (half the band, or half the frame), which doubles the cell size.
inline Resolution resolution(const SimulationConfig& cfg, Method method) {
  const double full_r = cfg.range_bin_width();
  const double full_v = cfg.velocity_bin_width();
  if (method == Method::Jcmsa) return {full_r, full_v};
  return {2.0 * full_r, 2.0 * full_v};
}

// 1-based bin the true target falls in. The Doppler phase always advances by
// T_sym per symbol, independent of the mapping duration mode.
inline int true_range_bin(const SimulationConfig& cfg) {
  return static_cast<int>(std::lround(cfg.target_range_m / cfg.range_bin_width())) %
             cfg.n_subcarriers + 1;
}

inline int true_velocity_bin(const SimulationConfig& cfg) {
  const double cycles = 2.0 * cfg.target_velocity_mps * cfg.carrier_freq_hz *
                        cfg.symbol_duration_s * cfg.n_symbols / cfg.light_speed_mps;
  const long k = std::lround(cycles) % cfg.n_symbols;
  return static_cast<int>(k < 0 ? k + cfg.n_symbols : k) + 1;
}

struct RmseBounds {
  double range_upper_m = 0.0;
  double range_lower_m = 0.0;
  double velocity_upper_mps = 0.0;
  double velocity_lower_mps = 0.0;
};

// Worst case: estimate lands in the last bin. Best case: estimate lands in
// the bin holding the target, leaving only the quantization error.
inline RmseBounds rmse_bounds(const SimulationConfig& cfg) {
  const double dr = cfg.range_bin_width();
  const double dv = cfg.velocity_bin_width();
  RmseBounds b;
  b.range_upper_m = dr * (cfg.n_subcarriers - 1) - cfg.target_range_m;
  b.range_lower_m = std::abs(dr * (true_range_bin(cfg) - 1) - cfg.target_range_m);
  b.velocity_upper_mps = dv * (cfg.n_symbols - 1) - cfg.target_velocity_mps;
  b.velocity_lower_mps = std::abs(dv * (true_velocity_bin(cfg) - 1) - cfg.target_velocity_mps);
  return b;
}

}  // namespace ncsense

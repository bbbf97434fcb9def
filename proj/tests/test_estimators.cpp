#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ncsense/estimators.hpp"

using namespace ncsense;

namespace {

PowerSpectrum spectrum(std::vector<double> v) {
  PowerSpectrum s;
  s.values = Eigen::Map<RVector>(v.data(), static_cast<Eigen::Index>(v.size()));
  return s;
}

SimulationConfig elementary() {
  auto cfg = default_config();
  cfg.velocity_duration_mode = DurationMode::Elementary;
  return cfg;
}

ChannelMatrix masked_draw(const SimulationConfig& cfg, const OccupancyMask& mask, double snr,
                          std::uint64_t seed) {
  return apply_mask(synthesize_occupied(cfg, truth_from_config(cfg), mask, snr, seed), mask);
}

FistaConfig least_squares_solver() {
  FistaConfig f;
  f.lambda = 1e-12;
  f.error_tol = 0.0;
  f.max_iters = 400;
  return f;
}

}  // namespace

TEST(PeakSearch, Examples) {
  EXPECT_EQ(peak_search(spectrum({0, 1, 0})), 2);
  EXPECT_EQ(peak_search(spectrum({1, 1})), 1);
  EXPECT_EQ(peak_search(spectrum({0, 3, 1, 3})), 2);
  EXPECT_THROW(peak_search(PowerSpectrum{}), std::invalid_argument);
}

TEST(BinMapping, Range) {
  const auto cfg = default_config();
  EXPECT_DOUBLE_EQ(range_from_bin(7, cfg), 117.1875);
  EXPECT_EQ(range_from_bin(1, cfg), 0.0);
  EXPECT_DOUBLE_EQ(range_from_bin(512, cfg), 9980.46875);
}

TEST(BinMapping, VelocityByDurationMode) {
  EXPECT_NEAR(velocity_from_bin(3, elementary()), 13.3929, 1e-3);
  EXPECT_NEAR(velocity_from_bin(3, default_config()), 10.7134, 1e-3);
  EXPECT_EQ(velocity_from_bin(1, default_config()), 0.0);
}

TEST(SolverConfig, AxisScaling) {
  const auto cfg = default_config();
  EXPECT_DOUBLE_EQ(axis_solver_config(cfg, Axis::Range, 5201).lambda, 5201.0 / 512.0);
  EXPECT_DOUBLE_EQ(axis_solver_config(cfg, Axis::Velocity, 1.5).lambda, 1.5);
  EXPECT_EQ(axis_solver_config(cfg, Axis::Range, 1).max_iters, cfg.fista_max_iters);
}

TEST(Jcmsa, GoldenRangeAndVelocity) {
  const auto cfg = elementary();
  const auto mask = scenario1_mask(cfg);
  const auto chan = masked_draw(cfg, mask, 10.0, 0);
  const auto r = estimate_range_jcmsa(chan, mask, cfg, 5201.0);
  EXPECT_EQ(r.peak_bin, 7);
  EXPECT_EQ(r.estimate, 117.1875);
  EXPECT_EQ(r.spectrum.contributing, 14);
  EXPECT_GT(r.solver_iters_total, 0);
  const auto v = estimate_velocity_jcmsa(chan, mask, cfg, 1.5);
  EXPECT_EQ(v.peak_bin, 3);
  EXPECT_NEAR(v.estimate, 13.3929, 1e-3);
  EXPECT_EQ(v.spectrum.contributing, 256);
}

TEST(Jcmsa, NoiseFreeFullOccupancyAgreesWithPlain) {
  const auto cfg = default_config();
  const OccupancyMask full(cfg.n_subcarriers, cfg.n_symbols, 1);
  const auto chan = masked_draw(cfg, full, 300.0, 0);
  const auto plain = estimate_plain_2dfft(chan, cfg);
  EXPECT_EQ(estimate_range_jcmsa(chan, full, cfg, least_squares_solver()).peak_bin,
            plain.range.peak_bin);
  EXPECT_EQ(estimate_velocity_jcmsa(chan, full, cfg, least_squares_solver()).peak_bin,
            plain.velocity.peak_bin);
}

// On a unitary system FISTA with vanishing weight is least squares, so the
// accumulated spectra coincide with the zero-filled FFT ones.
TEST(Jcmsa, DegeneratesToMaskedFftWithFullOccupancy) {
  const auto cfg = default_config();
  const OccupancyMask full(cfg.n_subcarriers, cfg.n_symbols, 1);
  const auto chan = masked_draw(cfg, full, 0.0, 11);
  const auto jr = estimate_range_jcmsa(chan, full, cfg, least_squares_solver());
  const auto fr = estimate_range_masked2dfft(chan, full, cfg);
  EXPECT_LT((jr.spectrum.values - fr.spectrum.values).cwiseAbs().maxCoeff(), 1e-4);
  const auto jv = estimate_velocity_jcmsa(chan, full, cfg, least_squares_solver());
  const auto fv = estimate_velocity_masked2dfft(chan, full, cfg);
  EXPECT_LT((jv.spectrum.values - fv.spectrum.values).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Jcmsa, AccumulationIsTheMeanOfSingleColumnSpectra) {
  auto cfg = default_config();
  cfg.n_symbols = 4;
  cfg.kcv_folds = 4;
  const auto mask = scenario2_mask(cfg);
  const auto chan = masked_draw(cfg, mask, 5.0, 3);
  const FistaConfig solver = axis_solver_config(cfg, Axis::Range, 3000);
  const auto all = estimate_range_jcmsa(chan, mask, cfg, solver);
  RVector mean = RVector::Zero(cfg.n_subcarriers);
  for (int m = 0; m < cfg.n_symbols; ++m) {
    ChannelMatrix single{CMatrix::Zero(cfg.n_subcarriers, cfg.n_symbols), ChannelKind::Masked};
    single.data.col(m) = chan.data.col(m);
    const auto one = estimate_range_jcmsa(single, mask, cfg, solver);
    EXPECT_EQ(one.spectrum.contributing, 1);
    mean += one.spectrum.values;
  }
  mean /= cfg.n_symbols;
  EXPECT_LT((all.spectrum.values - mean).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Jcmsa, ZeroColumnsAreSkipped) {
  const auto cfg = default_config();
  const auto mask = scenario1_mask(cfg);
  auto chan = masked_draw(cfg, mask, 10.0, 1);
  for (int m = 1; m < cfg.n_symbols; ++m) chan.data.col(m).setZero();
  const auto r = estimate_range_jcmsa(chan, mask, cfg, 5201.0);
  EXPECT_EQ(r.spectrum.contributing, 1);
  EXPECT_EQ(estimate_range_masked2dfft(chan, mask, cfg).spectrum.contributing, 1);
}

// Scaling the data by c and lambda by |c| scales the LASSO solution by c.
TEST(Estimators, PeakBinInvariantUnderScaling) {
  const auto cfg = default_config();
  const auto mask = scenario1_mask(cfg);
  const auto chan = masked_draw(cfg, mask, 0.0, 4);
  for (cplx c : {cplx(3.0, 0.0), cplx(0.0, -0.01), cplx(-20.0, 5.0)}) {
    ChannelMatrix scaled{c * chan.data, ChannelKind::Masked};
    EXPECT_EQ(estimate_range_jcmsa(chan, mask, cfg, 5000.0).peak_bin,
              estimate_range_jcmsa(scaled, mask, cfg, 5000.0 * std::abs(c)).peak_bin);
    EXPECT_EQ(estimate_velocity_jcmsa(chan, mask, cfg, 1.2).peak_bin,
              estimate_velocity_jcmsa(scaled, mask, cfg, 1.2 * std::abs(c)).peak_bin);
    EXPECT_EQ(estimate_range_masked2dfft(chan, mask, cfg).peak_bin,
              estimate_range_masked2dfft(scaled, mask, cfg).peak_bin);
    EXPECT_EQ(estimate_velocity_masked2dfft(chan, mask, cfg).peak_bin,
              estimate_velocity_masked2dfft(scaled, mask, cfg).peak_bin);
    const auto a = estimate_plain_2dfft(chan, cfg);
    const auto b = estimate_plain_2dfft(scaled, cfg);
    EXPECT_EQ(a.range.peak_bin, b.range.peak_bin);
    EXPECT_EQ(a.velocity.peak_bin, b.velocity.peak_bin);
  }
}

TEST(Jcmsa, StaticZeroVelocityTarget) {
  auto cfg = default_config();
  cfg.target_velocity_mps = 0.0;
  const auto mask = scenario1_mask(cfg);
  const auto chan = masked_draw(cfg, mask, 300.0, 0);
  EXPECT_EQ(estimate_velocity_jcmsa(chan, mask, cfg, 0.1).peak_bin, 1);
}

TEST(Jcmsa, OverRegularizationIsNoData) {
  const auto cfg = default_config();
  const auto mask = scenario1_mask(cfg);
  const auto chan = masked_draw(cfg, mask, 10.0, 0);
  EXPECT_THROW(estimate_range_jcmsa(chan, mask, cfg, 1e9), NoDataError);
  ChannelMatrix zero{CMatrix::Zero(cfg.n_subcarriers, cfg.n_symbols), ChannelKind::Masked};
  EXPECT_THROW(estimate_velocity_jcmsa(zero, mask, cfg, 1.0), NoDataError);
  EXPECT_THROW(estimate_range_masked2dfft(zero, mask, cfg), NoDataError);
  EXPECT_THROW(estimate_plain_2dfft(zero, cfg), NoDataError);
}

TEST(Jcmsa, DimensionMismatch) {
  const auto cfg = default_config();
  const auto chan = masked_draw(cfg, scenario1_mask(cfg), 10.0, 0);
  EXPECT_THROW(estimate_range_jcmsa(chan, OccupancyMask(8, 14), cfg, 1.0), DimensionError);
}

TEST(MaskedFft, NoiseFreeSameBinsAsJcmsaWithSidelobes) {
  const auto cfg = default_config();
  const auto mask = scenario1_mask(cfg);
  const auto chan = masked_draw(cfg, mask, 300.0, 0);
  const auto fr = estimate_range_masked2dfft(chan, mask, cfg);
  EXPECT_EQ(fr.peak_bin, estimate_range_jcmsa(chan, mask, cfg, 5201.0).peak_bin);
  EXPECT_EQ(fr.peak_bin, 7);
  EXPECT_EQ(estimate_velocity_masked2dfft(chan, mask, cfg).peak_bin, 3);
  EXPECT_TRUE(std::isfinite(fr.psr_db));
}

TEST(MaskedFft, TenDbSidelobesBelowJcmsa) {
  const auto cfg = default_config();
  const auto mask = scenario1_mask(cfg);
  const auto chan = masked_draw(cfg, mask, 10.0, 0);
  const auto fr = estimate_range_masked2dfft(chan, mask, cfg);
  const auto jr = estimate_range_jcmsa(chan, mask, cfg, 5201.0);
  EXPECT_TRUE(std::isfinite(fr.psr_db));
  EXPECT_LT(fr.psr_db, jr.psr_db);
}

// Noise-free and fully occupied, every column has the same magnitude
// profile, so the averaged profile squared is proportional to the
// periodogram slice.
TEST(MaskedFft, FullOccupancyMatchesPlainProfile) {
  const auto cfg = default_config();
  const OccupancyMask full(cfg.n_subcarriers, cfg.n_symbols, 1);
  const auto chan = masked_draw(cfg, full, 300.0, 0);
  const auto plain = estimate_plain_2dfft(chan, cfg);
  const RVector a = estimate_range_masked2dfft(chan, full, cfg).spectrum.values.array().square();
  const RVector b = plain.range.spectrum.values;
  EXPECT_LT((a / a.maxCoeff() - b / b.maxCoeff()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Plain, NoiseFreeBins) {
  const auto cfg = default_config();
  const auto chan = synthesize(cfg, truth_from_config(cfg), 300.0, 0);
  const auto p = estimate_plain_2dfft(chan, cfg);
  EXPECT_EQ(p.range.peak_bin, 7);
  EXPECT_EQ(p.velocity.peak_bin, 3);
  EXPECT_EQ(p.range.method, Method::Plain2dFft);
}

TEST(SpectrumCsv, Layout) {
  const auto cfg = default_config();
  PowerSpectrum s = spectrum({0.5, 1.0});
  std::ostringstream out;
  write_spectrum_csv(out, s, cfg);
  EXPECT_EQ(out.str(), "bin,value,range_m\n1,0.5,0\n2,1,19.53125\n");
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ncsense/channel.hpp"
#include "ncsense/fourier.hpp"

using namespace ncsense;

namespace {

int argmax_abs(const CVector& v) {
  Eigen::Index at = 0;
  v.cwiseAbs().maxCoeff(&at);
  return static_cast<int>(at);
}

}  // namespace

TEST(Steering, ZeroRangeAndVelocityAreAllOnes) {
  const auto cfg = default_config();
  EXPECT_LT((steering_range(cfg, 0.0) - CVector::Ones(512)).norm(), 1e-12);
  EXPECT_LT((steering_velocity(cfg, 0.0) - CVector::Ones(14)).norm(), 1e-12);
}

TEST(Steering, UnitModulus) {
  const auto cfg = default_config();
  for (auto v : steering_range(cfg)) EXPECT_NEAR(std::abs(v), 1.0, 1e-12);
  for (auto v : steering_velocity(cfg)) EXPECT_NEAR(std::abs(v), 1.0, 1e-12);
}

TEST(Steering, EntryFormula) {
  const auto cfg = default_config();
  const auto dr = steering_range(cfg);
  const auto dv = steering_velocity(cfg);
  const double pi = std::numbers::pi;
  const cplx j(0, 1);
  EXPECT_LT(std::abs(dr[4] - std::exp(-j * 2.0 * pi * 5.0 * 15e3 * 2.0 * 117.0 / 3e8)), 1e-12);
  EXPECT_LT(std::abs(dv[2] - std::exp(j * 2.0 * pi * 3.0 * 83.34e-6 * 2.0 * 13.0 * 24e9 / 3e8)),
            1e-12);
}

TEST(Steering, OnGridRangePeaksAtItsBin) {
  const auto cfg = default_config();
  const double bin = 3e8 / (2.0 * 15e3 * 512);
  EXPECT_EQ(argmax_abs(idft(steering_range(cfg, 6 * bin))), 6);
  // Off grid: 117 m is 5.99 bins.
  EXPECT_EQ(argmax_abs(idft(steering_range(cfg))), 6);
}

TEST(Steering, OneDopplerBinPeaksAtBinOne) {
  const auto cfg = default_config();
  const double bin = 3e8 / (2.0 * 24e9 * 14 * cfg.symbol_duration_s);
  EXPECT_EQ(argmax_abs(dft(steering_velocity(cfg, bin))), 1);
  EXPECT_EQ(argmax_abs(dft(steering_velocity(cfg))), 2);
}

TEST(Synthesize, NoiseFreeLimitIsRankOneProduct) {
  const auto cfg = default_config();
  const TargetTruth truth{117.0, 13.0, {0.6, -0.8}};
  const auto chan = synthesize(cfg, truth, 300.0, 1);
  const CMatrix expected = truth.amplitude * steering_range(cfg) * steering_velocity(cfg).transpose();
  EXPECT_LT((chan.data - expected).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(chan.kind, ChannelKind::Unprocessed);
}

// Every column a multiple of d_r, every row a multiple of d_v.
TEST(Synthesize, NoiseFreeFactorizes) {
  auto cfg = default_config();
  cfg.target_range_m = 431.2;
  cfg.target_velocity_mps = -7.3;
  const auto chan = synthesize(cfg, truth_from_config(cfg), 400.0, 9);
  const CVector dr = steering_range(cfg);
  const CVector dv = steering_velocity(cfg);
  for (int m = 0; m < chan.symbols(); ++m) {
    const CVector col = chan.data.col(m);
    const cplx scale = dr.dot(col) / dr.squaredNorm();
    EXPECT_LT((col - scale * dr).norm(), 1e-9);
  }
  for (int n = 0; n < chan.subcarriers(); ++n) {
    const CVector row = chan.data.row(n).transpose();
    const cplx scale = dv.dot(row) / dv.squaredNorm();
    EXPECT_LT((row - scale * dv).norm(), 1e-9);
  }
}

TEST(Synthesize, SameSeedIsBitIdentical) {
  const auto cfg = default_config();
  const auto a = synthesize(cfg, truth_from_config(cfg), 0.0, 1234);
  const auto b = synthesize(cfg, truth_from_config(cfg), 0.0, 1234);
  const auto c = synthesize(cfg, truth_from_config(cfg), 0.0, 1235);
  EXPECT_TRUE(a.data == b.data);
  EXPECT_FALSE(a.data == c.data);
}

TEST(Synthesize, NoiseVarianceMatchesSnr) {
  const auto cfg = default_config();
  const auto truth = truth_from_config(cfg);
  const CMatrix signal = steering_range(cfg) * steering_velocity(cfg).transpose();
  for (double snr : {0.0, 10.0, -20.0}) {
    const auto chan = synthesize(cfg, truth, snr, 77);
    const CMatrix noise = chan.data - signal;
    const double var = noise.cwiseAbs2().mean();
    const double expected = std::pow(10.0, -snr / 10.0);
    EXPECT_NEAR(var / expected, 1.0, 0.05) << snr;
    // Circular: real and imaginary parts carry half each.
    EXPECT_NEAR(noise.real().array().square().mean() / (expected / 2), 1.0, 0.07);
  }
}

TEST(Synthesize, NonFiniteSnrRejected) {
  const auto cfg = default_config();
  EXPECT_THROW(synthesize(cfg, truth_from_config(cfg), NAN, 0), std::invalid_argument);
}

TEST(SynthesizeOccupied, OccupiedCellsMatchFullSynthesis) {
  const auto cfg = default_config();
  const auto mask = scenario2_mask(cfg);
  const auto full = synthesize(cfg, truth_from_config(cfg), 5.0, 3);
  const auto occ = synthesize_occupied(cfg, truth_from_config(cfg), mask, 5.0, 3);
  const CMatrix signal = steering_range(cfg) * steering_velocity(cfg).transpose();
  for (int m = 0; m < cfg.n_symbols; ++m) {
    for (int n = 0; n < cfg.n_subcarriers; ++n) {
      if (mask.at(n, m)) {
        EXPECT_EQ(occ.data(n, m), full.data(n, m));
      } else {
        EXPECT_LT(std::abs(occ.data(n, m) - (full.data(n, m) - signal(n, m))), 1e-12);
      }
    }
  }
}

TEST(ApplyMask, AllOnesIsIdentity) {
  const auto cfg = default_config();
  const auto chan = synthesize(cfg, truth_from_config(cfg), 0.0, 5);
  const auto out = apply_mask(chan, OccupancyMask(512, 14, 1));
  EXPECT_TRUE(out.data == chan.data);
  EXPECT_EQ(out.kind, ChannelKind::Masked);
}

TEST(ApplyMask, ZeroesCentreBlockAndIsIdempotent) {
  const auto cfg = default_config();
  const auto mask = scenario1_mask(cfg);
  const auto chan = synthesize(cfg, truth_from_config(cfg), 0.0, 5);
  const auto once = apply_mask(chan, mask);
  for (int n = 0; n < 512; ++n) {
    const bool centre = n >= 128 && n < 384;
    for (int m = 0; m < 14; ++m) {
      if (centre) {
        EXPECT_EQ(once.data(n, m), cplx(0.0, 0.0));
      } else {
        EXPECT_EQ(once.data(n, m), chan.data(n, m));
      }
    }
  }
  EXPECT_TRUE(apply_mask(once, mask).data == once.data);
}

TEST(ApplyMask, DimensionMismatch) {
  const auto cfg = default_config();
  const auto chan = synthesize(cfg, truth_from_config(cfg), 0.0, 5);
  EXPECT_THROW(apply_mask(chan, OccupancyMask(256, 14)), DimensionError);
}

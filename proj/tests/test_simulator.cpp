#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "capcmp/fft.hpp"
#include "capcmp/simulator.hpp"
#include "capcmp/toeplitz.hpp"
#include "oracles.hpp"

namespace capcmp {
namespace {

double db(double linear) { return linear_to_db(linear); }

SimConfig config(ChannelTaps ch, std::size_t n, double gamma, std::size_t blocks,
                 std::uint64_t seed = 1) {
  SimConfig cfg{.channel = std::move(ch), .n = n, .gamma = gamma};
  cfg.blocks = blocks;
  cfg.seed = seed;
  return cfg;
}

double linear_mmse_snr(std::span<const double> gamma_k) {
  double s = 0.0;
  for (double g : gamma_k) s += 1.0 / (1.0 + g);
  return static_cast<double>(gamma_k.size()) / s - 1.0;
}

TEST(UnitaryDft, RoundTripAndParseval) {
  std::mt19937_64 eng(8);
  for (std::size_t n : {8u, 12u, 64u}) {
    const fft::UnitaryDft dft(n);
    auto x = testing::random_taps(eng, n);
    const auto orig = x;
    dft.forward(x);
    const auto want = testing::naive_dft(orig, n);
    double e0 = 0.0, e1 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      EXPECT_LT(std::abs(x[k] - want[k] / std::sqrt(double(n))), 1e-13);
      e0 += std::norm(orig[k]);
      e1 += std::norm(x[k]);
    }
    EXPECT_NEAR(e0, e1, 1e-12 * e0);
    dft.inverse(x);
    for (std::size_t k = 0; k < n; ++k) EXPECT_LT(std::abs(x[k] - orig[k]), 1e-13);
  }
}

TEST(Levinson, MatchesDenseSolve) {
  std::mt19937_64 eng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const auto ch = normalize(ChannelTaps(testing::random_taps(eng, 2 + trial % 10)));
    const auto H = freq_response(ch, 64);
    const std::size_t p = 1 + trial % 8;
    std::vector<cplx> r(p + 1);
    for (std::size_t m = 0; m <= p; ++m) {
      for (std::size_t k = 0; k < 64; ++k) {
        r[m] += std::polar(1.0 / (1.0 + 10.0 * std::norm(H[k])),
                           2.0 * std::numbers::pi * double(k * m) / 64.0) / 64.0;
      }
    }
    r[0] = r[0].real();
    const auto pef = levinson_durbin(r);
    const auto a = testing::dense_toeplitz_solve(r);
    EXPECT_NEAR(pef.error_power, 1.0 / a[0].real(), 1e-12);
    for (std::size_t i = 0; i <= p; ++i) {
      EXPECT_LT(std::abs(pef.coefficients[i] - a[i] / a[0]), 1e-10) << "i=" << i;
    }
  }
}

TEST(Levinson, SingularInput) {
  const std::vector<cplx> r{0.0, 0.0};
  EXPECT_THROW(levinson_durbin(r), NumericalError);
  EXPECT_THROW(levinson_durbin(std::vector<cplx>{}), DomainError);
}

TEST(DesignMmseDfe, FlatChannel) {
  const std::vector<cplx> H(16, 1.0);
  const auto d = design_mmse_dfe(H, 10.0, 3);
  ASSERT_EQ(d.b.size(), 3u);
  for (const auto& b : d.b) EXPECT_LT(std::abs(b), 1e-15);
  for (const auto& q : d.Q) EXPECT_LT(std::abs(q - 10.0 / 11.0), 1e-15);
  EXPECT_NEAR(d.predicted_unbiased_snr, 10.0, 1e-12);
}

TEST(DesignMmseDfe, LinearEqualizerClosedForm) {
  const std::vector<cplx> H{std::sqrt(3.0), 1.0};
  const auto d = design_mmse_dfe(H, 1.0, 0);
  EXPECT_TRUE(d.b.empty());
  EXPECT_NEAR(d.predicted_unbiased_snr, 5.0 / 3.0, 1e-14);
}

TEST(DesignMmseDfe, Fig3MatchesGeometricMean) {
  const auto H = freq_response(fig3_channel(), 512);
  const double gamma = db_to_linear(11.0);
  const auto d = design_mmse_dfe(H, gamma, 4);
  EXPECT_NEAR(db(d.predicted_unbiased_snr), db(dfe_snr(subcarrier_snrs(H, gamma))), 0.05);
  EXPECT_GT(d.predicted_mmse, 0.0);
}

TEST(DesignMmseDfe, Preconditions) {
  const std::vector<cplx> H(8, 1.0);
  EXPECT_THROW(design_mmse_dfe(H, 1.0, 8), DomainError);
  EXPECT_THROW(design_mmse_dfe(H, 0.0, 1), DomainError);
}

TEST(GenieFeedback, NeverUsesCurrentSymbol) {
  const std::size_t n = 8;
  const std::vector<cplx> b(n - 1, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<cplx> only(n, 0.0);
    only[i] = 1.0;
    EXPECT_EQ(genie_feedback(only, b, i), cplx(0.0));
    // With every other lag present, all other symbols are fed back.
    EXPECT_EQ(genie_feedback(only, b, (i + 1) % n), cplx(1.0));
  }
  const std::vector<cplx> x{1.0, 2.0, 3.0, 4.0};
  const std::vector<cplx> b2{10.0, 100.0};
  EXPECT_EQ(genie_feedback(x, b2, 0), cplx(10.0 * 4.0 + 100.0 * 3.0));
  EXPECT_EQ(genie_feedback(x, b2, 3), cplx(10.0 * 3.0 + 100.0 * 2.0));
}

TEST(Validate, RejectsBadConfigs) {
  EXPECT_THROW(validate(config(fig3_channel(), 4, 1.0, 1)), DomainError);
  EXPECT_THROW(validate(config(fig3_channel(), 8, 1.0, 0)), DomainError);
  EXPECT_THROW(validate(config(fig3_channel(), 8, 0.0, 1)), DomainError);
  auto bad = config(fig3_channel(), 8, 1.0, 1);
  bad.order = 8;
  EXPECT_THROW(validate(bad), DomainError);
}

TEST(SimulateOfdm, FlatChannel) {
  const auto res = simulate_ofdm(config(ChannelTaps::real({1.0}), 16, 10.0, 100'000));
  EXPECT_EQ(res.sample_count, 1'600'000u);
  for (double s : res.measured_snr) EXPECT_NEAR(db(s), 10.0, 0.1);
}

TEST(SimulateOfdm, Fig1MatchesSubcarrierSnrs) {
  const auto res = simulate_ofdm(config(fig1_channel(), 8, db_to_linear(11.0), 1'000'000, 3));
  ASSERT_EQ(res.measured_snr.size(), 8u);
  for (std::size_t k = 0; k < 8; ++k) {
    EXPECT_NEAR(db(res.measured_snr[k]), db(res.predicted_snr[k]), 0.1) << "k=" << k;
  }
}

TEST(SimulateOfdm, NoiselessReconstruction) {
  // At gamma = 1e12 the weakest Fig-1 subcarrier sits at 92.6 dB, so the
  // measurement must track gamma_k there (noise-limited, not roundoff-limited);
  // at 1e16 every subcarrier clears 100 dB.
  for (double gamma : {1e12, 1e16}) {
    auto cfg = config(fig1_channel(), 8, gamma, 5000);
    cfg.order = 64;
    const auto res = simulate_ofdm(cfg);
    const auto H = freq_response(cfg.channel, 8);
    for (std::size_t k = 0; k < 8; ++k) {
      if (std::norm(H[k]) <= 1e-6) continue;
      EXPECT_NEAR(db(res.measured_snr[k]), db(res.predicted_snr[k]), 0.5) << gamma;
      if (gamma * std::norm(H[k]) >= 1e10) {
        EXPECT_GE(db(res.measured_snr[k]), 100.0) << gamma;
      }
    }
  }
}

TEST(SimulateOfdm, NoiseScaling) {
  const auto a = simulate_ofdm(config(ChannelTaps::real({1.0}), 16, 20.0, 50'000, 5));
  const auto b = simulate_ofdm(config(ChannelTaps::real({1.0}), 16, 10.0, 50'000, 6));
  for (std::size_t k = 0; k < 16; ++k) {
    EXPECT_NEAR(db(a.measured_snr[k]) - db(b.measured_snr[k]), 3.0103, 0.1);
  }
}

TEST(SimulateScdfe, FlatChannel) {
  const auto res = simulate_scdfe_genie(config(ChannelTaps::real({1.0}), 16, 10.0, 100'000));
  ASSERT_EQ(res.measured_snr.size(), 1u);
  EXPECT_NEAR(db(res.measured_snr[0]), 10.0, 0.1);
  EXPECT_NEAR(*res.geometric_snr, 10.0, 1e-12);
}

TEST(SimulateScdfe, Fig3MatchesGeometricMean) {
  for (double snr_db : {5.0, 11.0, 20.0}) {
    auto cfg = config(fig3_channel(), 512, db_to_linear(snr_db), 2000, 7);
    cfg.fb_len = 4;
    cfg.order = 16;
    const auto res = simulate_scdfe_genie(cfg);
    EXPECT_GE(res.sample_count, 1'000'000u);
    EXPECT_NEAR(db(res.measured_snr[0]), db(*res.geometric_snr), 0.1) << snr_db;
    EXPECT_NEAR(db(res.measured_snr[0]), db(res.predicted_snr[0]), 0.1) << snr_db;
  }
}

TEST(SimulateScdfe, LinearEqualizerClosedForm) {
  auto cfg = config(fig3_channel(), 512, db_to_linear(11.0), 2000, 9);
  cfg.fb_len = 0;
  const auto res = simulate_scdfe_genie(cfg);
  const auto p = make_profile(cfg.channel, 512, cfg.gamma);
  EXPECT_NEAR(db(res.measured_snr[0]), db(linear_mmse_snr(p.gamma_k)), 0.1);
}

TEST(SimulateScdfe, FeedbackHelpsAndStaysBelowMatchedFilterBound) {
  std::mt19937_64 eng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const auto ch = normalize(ChannelTaps(testing::random_taps(eng, 3 + trial)));
    const double gamma = db_to_linear(12.0);
    auto dfe_cfg = config(ch, 64, gamma, 4000, 100 + trial);
    auto lin_cfg = dfe_cfg;
    lin_cfg.fb_len = 0;
    const double dfe = db(simulate_scdfe_genie(dfe_cfg).measured_snr[0]);
    const double lin = db(simulate_scdfe_genie(lin_cfg).measured_snr[0]);
    const auto p = make_profile(ch, 64, gamma);
    const double mfb = db(std::accumulate(p.gamma_k.begin(), p.gamma_k.end(), 0.0) / 64.0);
    EXPECT_GE(dfe, lin - 0.05) << trial;
    EXPECT_LE(dfe, mfb + 0.1) << trial;
    EXPECT_LE(lin, mfb + 0.1) << trial;
  }
}

TEST(Simulator, DeterministicAcrossThreadCounts) {
  auto cfg = config(fig3_channel(), 64, db_to_linear(9.0), 300, 1234);
  ::setenv("CAPCMP_THREADS", "1", 1);
  const auto a_ofdm = simulate_ofdm(cfg);
  const auto a_dfe = simulate_scdfe_genie(cfg);
  ::setenv("CAPCMP_THREADS", "4", 1);
  const auto b_ofdm = simulate_ofdm(cfg);
  const auto b_dfe = simulate_scdfe_genie(cfg);
  ::unsetenv("CAPCMP_THREADS");
  EXPECT_EQ(a_ofdm.measured_snr, b_ofdm.measured_snr);
  EXPECT_EQ(a_dfe.measured_snr, b_dfe.measured_snr);

  cfg.seed = 1235;
  EXPECT_NE(simulate_scdfe_genie(cfg).measured_snr, a_dfe.measured_snr);
}

}  // namespace
}  // namespace capcmp

#include <gtest/gtest.h>

#include <random>

#include "covchan/timing_model.hpp"

using namespace covchan;

namespace {

PhysicalParams phys(double c, double l, double r = 1.0) {
  PhysicalParams p;
  p.cache_mb = c;
  p.read_rate = l;
  p.receiver_read_mb = r;
  return p;
}

}  // namespace

TEST(SafetyFrameTest, ProportionalRule) {
  EXPECT_DOUBLE_EQ(t_sav(1.0, 0.1), 0.1);
  EXPECT_DOUBLE_EQ(t_sav(0.0, 0.1), 0.0);
  EXPECT_NEAR(t_sav(4.473, 0.1), 0.4473, 1e-12);
  EXPECT_DOUBLE_EQ(t_sav(3.0, 0.0), 0.0);
  EXPECT_THROW(t_sav(-1.0, 0.1), ConfigError);
}

TEST(BitTimeBasicTest, PlugIn) {
  EXPECT_DOUBLE_EQ(bit_time_basic(phys(32, 8), 0.0), 4.125);
  EXPECT_NEAR(bit_time_basic(phys(2, 6.849), 0.0), 0.438, 5e-4);
  EXPECT_NEAR(bit_time_basic(phys(2, 6.849), 0.1), 1.1 * bit_time_basic(phys(2, 6.849), 0.0), 1e-12);
  // Explicit frame form.
  EXPECT_DOUBLE_EQ(bit_time_frames(1.0, 0.5, 0.1), 1.1 + 0.55);
}

TEST(TotalTimeBasicTest, Linear) {
  EXPECT_EQ(total_time_basic(0, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(total_time_basic(64, 0.5), 32.0);
  // 16 MB row: 27 * 2.224 against the printed 60.055 s.
  EXPECT_NEAR(total_time_basic(27, 2.224), 60.048, 1e-9);
  EXPECT_NEAR(total_time_basic(27, 2.224), 60.055, 0.005 * 60.055);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto a = rng() % 1000, b = rng() % 1000;
    const double tb = 0.001 + static_cast<double>(rng() % 10000) / 1000.0;
    EXPECT_NEAR(total_time_basic(a + b, tb), total_time_basic(a, tb) + total_time_basic(b, tb), 1e-9);
  }
}

TEST(BitTimeOptimizedTest, PlugIn) {
  const double l = 32.0 / 4.473;
  EXPECT_NEAR(bit_time_optimized(phys(32, l)), 4.473 + 1.0 / l, 1e-12);
  EXPECT_NEAR(bit_time_optimized(phys(32, l)), 4.613, 5e-4);
  EXPECT_NEAR(bit_time_optimized(phys(7, 7)), 8.0 / 7.0, 1e-12);
  EXPECT_THROW(bit_time_optimized(phys(0, 7)), ConfigError);
}

TEST(BitTimeOptimizedTest, NeverExceedsBasic) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> c(0.5, 128), l(0.5, 500), f(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const auto p = phys(c(rng), l(rng));
    const double frac = f(rng);
    EXPECT_LE(bit_time_optimized(p), bit_time_basic(p, frac) + 1e-12);
    if (frac > 0) {
      EXPECT_LT(bit_time_optimized(p), bit_time_basic(p, frac));
    }
  }
}

TEST(TotalTimeOptimizedTest, PlugInAndTelescoping) {
  EXPECT_DOUBLE_EQ(total_time_optimized(1, phys(1, 1)), 3.0);
  EXPECT_NEAR(total_time_optimized(64, phys(2, 6.849)), 28.18, 0.005);
  EXPECT_THROW(total_time_optimized(0, phys(2, 7)), ConfigError);
  const auto p = phys(16, 7.19);
  for (std::uint64_t n = 2; n < 70; ++n)
    EXPECT_NEAR(total_time_optimized(n, p) - total_time_optimized(n - 1, p), bit_time_optimized(p), 1e-9);
}

TEST(MixedMessageTest, TableRows) {
  const auto r32 = mixed_message_theoretical_time(27, 37, 4.4727, 2.0);
  EXPECT_NEAR(r32.ones_time, 120.76, 0.01);
  EXPECT_DOUBLE_EQ(r32.zeros_time, 74.0);
  EXPECT_NEAR(r32.total, 194.762, 0.02);

  const auto r2 = mixed_message_theoretical_time(27, 37, 0.2916, 0.125);
  EXPECT_NEAR(r2.ones_time, 7.873, 0.001);
  EXPECT_DOUBLE_EQ(r2.zeros_time, 4.625);
  EXPECT_NEAR(r2.total, 12.498, 0.001);

  const auto zero = mixed_message_theoretical_time(0, 0, 1.0, 1.0);
  EXPECT_EQ(zero.total, 0.0);
}

TEST(FitParamsTest, ReadRateFromObservation) {
  EXPECT_NEAR(fit_params_from_observation(2, 0.292).read_rate, 6.849, 5e-4);
  EXPECT_NEAR(fit_params_from_observation(64, 8.810).read_rate, 7.264, 5e-4);
  EXPECT_DOUBLE_EQ(fit_params_from_observation(3.5, 3.5).read_rate, 1.0);
  EXPECT_THROW(fit_params_from_observation(0, 1), ConfigError);
  EXPECT_THROW(fit_params_from_observation(1, 0), ConfigError);
}

TEST(FitParamsTest, RoundTripOnReadRate) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> c(0.5, 256), l(0.1, 1000);
  for (int i = 0; i < 500; ++i) {
    const double cache = c(rng), rate = l(rng);
    EXPECT_NEAR(fit_params_from_observation(cache, cache / rate).read_rate, rate, 1e-9 * rate);
  }
}

TEST(ThroughputTest, Values) {
  EXPECT_NEAR(throughput(64, 28.238), 2.266, 0.001);
  EXPECT_NEAR(throughput(64, 436.724), 0.147, 0.001);
  EXPECT_EQ(throughput(0, 5.0), 0.0);
  EXPECT_THROW(throughput(1, 0.0), ConfigError);
  EXPECT_THROW(throughput(1, -2.0), ConfigError);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 200; ++i) {
    const auto n = rng() % 100000;
    const double t = 0.001 + static_cast<double>(rng() % 1000000) / 997.0;
    EXPECT_NEAR(throughput(n, t) * t, static_cast<double>(n), 1e-9 * std::max(1.0, static_cast<double>(n)));
  }
}

TEST(ResolveTimingTest, Defaults) {
  const auto p = phys(2, 6.849);
  const auto t = resolve_timing(p);
  EXPECT_NEAR(t.sender_frame, 2 / 6.849, 1e-12);
  EXPECT_NEAR(t.receiver_frame, 1 / 6.849, 1e-12);
  EXPECT_DOUBLE_EQ(t.safety_fraction, 0.1);
  EXPECT_DOUBLE_EQ(t.wait_period, 0.125);
  EXPECT_NEAR(t.threshold, 0.07317, 1e-5);
  EXPECT_LT(t.threshold, t.receiver_frame + t_sav(t.receiver_frame, t));
}

TEST(ResolveTimingTest, RejectsFramesShorterThanTransfers) {
  TimingOverrides o;
  o.sender_frame = 0.1;
  EXPECT_THROW(resolve_timing(phys(2, 6.849), o), ConfigError);
  o = {};
  o.receiver_frame = 0.01;
  EXPECT_THROW(resolve_timing(phys(2, 6.849), o), ConfigError);
}

TEST(PhysicalParamsTest, Invariants) {
  auto p = phys(2, 7);
  EXPECT_NO_THROW(p.validate());
  p.ram_rate = 7;
  EXPECT_THROW(p.validate(), ConfigError);
  p = phys(2, 7, 0.75);
  EXPECT_THROW(p.validate(), ConfigError);
  p = phys(2, -1);
  EXPECT_THROW(p.validate(), ConfigError);
}

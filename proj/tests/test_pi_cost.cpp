#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "forge/forge.hpp"
#include "generators.hpp"

using namespace forge;

namespace {

const std::string kCalib = FORGE_DEFAULT_DATA_DIR "/calib";

}  // namespace

TEST(PiCost, ShippedCalibrationLoads) {
  for (const char* ds : {"cifar100", "tinyimagenet", "cifar100-r34", "tinyimagenet-r34", "cifar", "tiny"}) {
    const auto c = load_calibration(kCalib, ds);
    EXPECT_DOUBLE_EQ(c.gc_seconds_per_kilorelu, 0.1123) << ds;
    EXPECT_DOUBLE_EQ(c.gc_storage_per_relu, 18432) << ds;
    EXPECT_FALSE(c.he_anchors.empty()) << ds;
  }
}

TEST(PiCost, AnchorsAreExact) {
  const auto c = load_calibration(kCalib, "cifar100");
  for (const auto& a : c.he_anchors) {
    const auto e = he_latency(a.flops, c);
    EXPECT_EQ(e.seconds, a.seconds);
    EXPECT_FALSE(e.extrapolated);
  }
}

TEST(PiCost, InterpolationIsMonotoneBetweenAnchors) {
  const auto c = load_calibration(kCalib, "tinyimagenet");
  double prev = 0;
  for (double f = c.he_anchors.front().flops; f <= c.he_anchors.back().flops; f *= 1.05) {
    const auto e = he_latency(f, c);
    EXPECT_FALSE(e.extrapolated);
    EXPECT_GE(e.seconds, prev);
    prev = e.seconds;
  }
}

TEST(PiCost, ExtrapolationIsFlagged) {
  const auto c = load_calibration(kCalib, "cifar100");
  const auto lo = he_latency(c.he_anchors.front().flops / 2, c);
  EXPECT_TRUE(lo.extrapolated);
  EXPECT_NEAR(lo.seconds, c.he_anchors.front().seconds / 2, 1e-9);
  const auto hi = he_latency(c.he_anchors.back().flops * 2, c);
  EXPECT_TRUE(hi.extrapolated);
  EXPECT_NEAR(hi.seconds, c.he_anchors.back().seconds * 2, 1e-9);
  EXPECT_TRUE(he_latency(0, c).extrapolated);
  EXPECT_EQ(he_latency(0, c).seconds, 0);
}

TEST(PiCost, NearestInterpolation) {
  auto c = load_calibration(kCalib, "cifar100");
  c.interpolation = Interpolation::Nearest;
  EXPECT_EQ(he_latency(560e6, c).seconds, 268);
  EXPECT_EQ(he_latency(1000e6, c).seconds, 770);
}

TEST(PiCost, GcAndStorageAreAdditive) {
  const auto c = load_calibration(kCalib, "cifar100");
  std::mt19937 rng(31);
  for (int i = 0; i < 200; ++i) {
    const double a = gen::uniform(rng, 0, 2000000), b = gen::uniform(rng, 0, 2000000);
    EXPECT_NEAR(gc_latency(a + b, c), gc_latency(a, c) + gc_latency(b, c), 1e-9);
    EXPECT_NEAR(storage(a + b, c), storage(a, c) + storage(b, c), 1e-3);
  }
}

TEST(PiCost, ResNet18Storage) {
  const auto c = load_calibration(kCalib, "cifar100");
  const auto s = build_family(Family::resnet18(), 64, ScalingMethod::uniform(), {32, 32, 3}, 100);
  const auto e = estimate(s, c);
  EXPECT_EQ(format_gib(e.storage_bytes), "9.56 GiB");
  EXPECT_NEAR(e.gc_seconds, 557.056 * 0.1123, 1e-9);
}

TEST(PiCost, SpecEstimateUsesPreReuseFlops) {
  const auto c = load_calibration(kCalib, "cifar100");
  auto s = build_family(Family::resnet18(), 16, ScalingMethod::stagewise({2, 5, 3}), {32, 32, 3}, 100);
  s = thin(cull(s, 1), {2, 3, 4});
  EXPECT_EQ(estimate(relu_reuse(s, 4), c).he_seconds, estimate(s, c).he_seconds);
  EXPECT_LT(estimate(relu_reuse(s, 4), c).gc_seconds, estimate(s, c).gc_seconds);
}

TEST(PiCost, CalibrationErrors) {
  EXPECT_THROW(load_calibration("/nonexistent", "cifar100"), IoError);
  EXPECT_THROW(load_calibration(kCalib, "imagenet"), IoError);
  CostCalibration c;
  c.he_anchors = {{1e6, 1, ""}, {1e6, 2, ""}};
  EXPECT_THROW(c.normalize(), DomainError);
  c.he_anchors = {{1e6, -1, ""}};
  EXPECT_THROW(c.normalize(), DomainError);
  c.he_anchors.clear();
  EXPECT_THROW(he_latency(1e6, c), DomainError);
  EXPECT_THROW(gc_latency(-1, c), DomainError);
}

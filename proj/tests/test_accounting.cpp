#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "forge/csv.hpp"
#include "forge/forge.hpp"
#include "generators.hpp"
#include "oracle.hpp"

using namespace forge;

namespace {

oracle::Net to_oracle(const gen::Shape& s, int m) {
  oracle::Net n;
  n.h = s.input.height;
  n.w = s.input.width;
  n.c = s.input.channels;
  n.classes = s.classes;
  n.m = m;
  n.blocks = s.blocks;
  n.channels = channels_from_multipliers(m, s.multipliers);
  return n;
}

NetworkSpec r18(int m, std::vector<int> mult, InputShape in = {32, 32, 3}, int classes = 100) {
  return build_family(Family::resnet18(), m, ScalingMethod::stagewise(std::move(mult)), in, classes);
}

double mflops(const NetworkSpec& s) { return static_cast<double>(profile(s).total_flops) / 1e6; }
double krelus(const NetworkSpec& s) { return static_cast<double>(profile(s).total_relus) / 1e3; }

}  // namespace

TEST(Accounting, MatchesLayerWalkOracle) {
  std::mt19937 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto shape = gen::random_shape(rng);
    const int m = 4 * gen::uniform(rng, 1, 8);
    const auto spec = gen::realize(shape, m);
    const auto n = to_oracle(shape, m);
    const auto p = profile(spec);
    EXPECT_EQ(p.relus, oracle::stage_relus(n));
    EXPECT_EQ(p.total_flops, oracle::macs(n));
    const auto t = profile(thin_all(spec));
    EXPECT_EQ(t.total_relus, oracle::total_relus(n, [](const oracle::Layer& l) { return !oracle::thinned(l); }));
  }
}

TEST(Accounting, ResNet18Golden) {
  const auto p = profile(r18(64, {2, 2, 2}));
  EXPECT_EQ(p.total_relus, 557056);
  EXPECT_EQ(p.relus, (std::vector<std::int64_t>{327680, 131072, 65536, 32768}));
  EXPECT_NEAR(static_cast<double>(p.total_flops) / 1e6, 555.47, 0.01);
}

// Totals listed alongside the baselines and the equalized networks.
TEST(Accounting, BaselineAndHrnTotals) {
  const auto wrn = build_family(Family::wrn(22, 8), 16, ScalingMethod::uniform(), {32, 32, 3}, 100);
  const struct {
    NetworkSpec spec;
    double krelu;
    double mflop;
  } rows[] = {
      {wrn, 1393, 2461},
      {r18(64, {2, 2, 2}), 557, 559},
      {r18(16, {5, 5, 3}), 343, 1055},
      {r18(16, {5, 7, 2}), 379, 1273},
      {r18(16, {6, 6, 2}), 401, 1368},
      {r18(16, {7, 5, 2}), 412, 1328},
      {r18(16, {2, 5, 3}), 186, 179},
      {r18(16, {2, 7, 2}), 201, 213},
      {r18(16, {2, 6, 2}), 188, 163},
      {r18(16, {2, 5, 2}), 176, 119},
  };
  for (const auto& r : rows) {
    EXPECT_EQ(std::round(krelus(r.spec)), r.krelu) << r.spec.name;
    EXPECT_NEAR(mflops(r.spec), r.mflop, 0.015 * r.mflop) << r.spec.name;
  }
}

TEST(Accounting, IsoReluNetworks) {
  const auto a = build_family(Family::resnet18(), 32, ScalingMethod::uniform(), {32, 32, 3}, 100);
  const auto b = build_family(Family::resnet18(), 16, ScalingMethod::homogeneous(4), {32, 32, 3}, 100);
  const auto c = r18(16, {3, 7, 2});
  EXPECT_EQ(format_kilo(krelus(a) * 1e3, 0), "279K");
  EXPECT_EQ(format_kilo(krelus(b) * 1e3, 0), "279K");
  EXPECT_EQ(format_kilo(krelus(c) * 1e3, 0), "260K");
  EXPECT_NEAR(mflops(a), 141, 0.015 * 141);
  EXPECT_NEAR(mflops(b), 661, 0.015 * 661);
  EXPECT_NEAR(mflops(c), 466, 0.015 * 466);
  auto pct = [](const NetworkSpec& s) {
    std::vector<std::string> out;
    for (double f : relu_distribution(s)) out.push_back(fixed(100 * f, 2));
    return out;
  };
  EXPECT_EQ(pct(a), (std::vector<std::string>{"58.82", "23.53", "11.76", "5.88"}));
  EXPECT_EQ(pct(b), (std::vector<std::string>{"29.41", "23.53", "23.53", "23.53"}));
  EXPECT_EQ(pct(c), (std::vector<std::string>{"31.50", "18.90", "33.07", "16.54"}));
}

// Every per-stage ReLU count listed in the shipped probe tables.
TEST(Accounting, ProbeTableStageCounts) {
  for (const char* file : {"resnet18_basech_stagech.csv", "hrn_alpha_sweep.csv"}) {
    const auto t = load_csv(std::string(FORGE_DEFAULT_DATA_DIR "/probes/") + file, {"m", "mult", "stage", "relus"});
    ASSERT_FALSE(t.rows.empty());
    for (const auto& row : t.rows) {
      std::vector<int> mult;
      std::stringstream ss(row.text("mult"));
      std::string x;
      while (std::getline(ss, x, 'x')) mult.push_back(std::stoi(x));
      const auto s = r18(row.integer("m"), mult);
      const auto k = static_cast<std::size_t>(row.integer("stage") - 1);
      EXPECT_EQ(format_kilo(static_cast<double>(profile(s).relus[k])), row.text("relus"))
          << file << " line " << row.line;
    }
  }
}

TEST(Accounting, ReluCountLinearInBaseWidth) {
  std::mt19937 rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto shape = gen::random_shape(rng);
    const int m = gen::uniform(rng, 1, 32);
    const int k = gen::uniform(rng, 2, 5);
    const auto a = profile(gen::realize(shape, m));
    const auto b = profile(gen::realize(shape, k * m));
    for (std::size_t s = 0; s < a.relus.size(); ++s) EXPECT_EQ(b.relus[s], k * a.relus[s]);
  }
}

TEST(Accounting, FractionsSumToOne) {
  std::mt19937 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto spec = gen::random_transformed(rng);
    const auto p = profile(spec);
    if (p.total_relus == 0) continue;
    const double sum = std::accumulate(p.relu_fraction.begin(), p.relu_fraction.end(), 0.0);
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_EQ(std::accumulate(p.relus.begin(), p.relus.end(), std::int64_t{0}), p.total_relus);
  }
}

TEST(Accounting, ZeroReluNetworkHasZeroFractions) {
  auto s = r18(16, {2, 2, 2});
  for (int k = 1; k <= 4; ++k) s = cull(s, k);
  const auto p = profile(s);
  EXPECT_EQ(p.total_relus, 0);
  for (double f : p.relu_fraction) EXPECT_EQ(f, 0.0);
}

TEST(Accounting, NormalizedProfiles) {
  const struct {
    double a, b, g;
    std::vector<double> flops, relus;
  } rows[] = {
      {2, 2, 2, {64, 64, 64, 64}, {64, 32, 16, 8}},
      {3, 3, 3, {64, 144, 324, 729}, {64, 48, 36, 27}},
      {4, 4, 4, {64, 256, 1024, 4096}, {64, 64, 64, 64}},
      {6, 6, 6, {64, 576, 5184, 46656}, {64, 96, 144, 216}},
      {5, 7, 2, {64, 400, 4900, 4900}, {64, 80, 140, 70}},
      {7, 5, 2, {64, 784, 4900, 4900}, {64, 112, 140, 70}},
      {6, 6, 2, {64, 576, 5184, 5184}, {64, 96, 144, 72}},
      {5, 5, 3, {64, 400, 2500, 5625}, {64, 80, 100, 75}},
  };
  for (const auto& r : rows) {
    const auto p = normalized_profile(r.a, r.b, r.g);
    EXPECT_EQ(std::vector<double>(p.flops.begin(), p.flops.end()), r.flops);
    EXPECT_EQ(std::vector<double>(p.relus.begin(), p.relus.end()), r.relus);
  }
}

TEST(Accounting, NormalizedProfileMatchesRealNetwork) {
  const auto s = r18(16, {5, 5, 3});
  const auto p = profile(s);
  const auto n = normalized_profile(5, 5, 3);
  for (std::size_t k = 0; k < 4; ++k)
    EXPECT_DOUBLE_EQ(n.relus[k] / 64.0, static_cast<double>(p.body_relus(k)) / static_cast<double>(p.body_relus(0)));
}

TEST(Accounting, HomogeneousFourKeepsProfileFlat) {
  const auto p = normalized_profile(4, 4, 4);
  for (std::size_t k = 1; k < 4; ++k) EXPECT_EQ(p.relus[k], p.relus[0]);
}

TEST(Accounting, ComplexityRatios) {
  const auto s = r18(64, {2, 2, 2});
  const auto r = complexity_ratios(s);
  ASSERT_EQ(r.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    const double c = s.stages[k].channels;
    const double side = 32 >> k;
    EXPECT_DOUBLE_EQ(r[k].flops_per_relu, c * 9);
    EXPECT_DOUBLE_EQ(r[k].params_per_relu, c * 9 / (side * side));
  }
  const auto wrn = build_family(Family::wrn(22, 8), 16, ScalingMethod::uniform(), {32, 32, 3}, 100);
  EXPECT_THROW(complexity_ratios(wrn), DomainError);
}

TEST(Accounting, ReuseFlopsMatchPartitionOracle) {
  const auto base = thin(cull(r18(16, {2, 5, 3}), 1), {2, 3, 4});
  const auto shape = gen::Shape{{2, 2, 2, 2}, {2, 5, 3}, {32, 32, 3}, 100};
  for (int n : {2, 4, 8, 16}) {
    const auto spec = relu_reuse(base, n);
    std::int64_t expect = 0;
    for (const auto& l : oracle::enumerate(to_oracle(shape, 16))) {
      if (l.kind == oracle::Layer::Relu) continue;
      const bool feeds_reuse = l.kind == oracle::Layer::Conv && l.kernel == 3 && l.block >= 0 && l.stage > 1 && l.pos == 1;
      if (feeds_reuse)
        expect += oracle::reuse_conv_macs(l.c_in, l.c_out, l.h * l.w, n);
      else
        expect += l.c_in * l.c_out * l.kernel * l.kernel * l.h * l.w;
    }
    EXPECT_EQ(profile(spec).total_flops, expect) << "N=" << n;
    EXPECT_EQ(profile(spec, ReuseFlops::Ignore).total_flops, profile(base).total_flops);
  }
}

TEST(Accounting, ReuseFlopsNearListedValues) {
  const auto base = thin(cull(r18(16, {2, 5, 3}), 1), {2, 3, 4});
  const std::pair<int, double> rows[] = {{4, 121.6}, {8, 130.5}, {16, 137.2}};
  for (const auto& [n, listed] : rows) EXPECT_NEAR(mflops(relu_reuse(base, n)), listed, 0.10 * listed) << n;
}

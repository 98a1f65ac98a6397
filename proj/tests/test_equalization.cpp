#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "forge/forge.hpp"
#include "generators.hpp"
#include "oracle.hpp"

using namespace forge;

namespace {

std::string joined(const std::vector<Inequality>& q) {
  std::string s;
  for (const auto& x : q) s += (s.empty() ? "" : " ") + x.to_string();
  return s;
}

std::vector<std::string> names(const std::vector<EqualizationSolution>& v) {
  std::vector<std::string> out;
  for (const auto& s : v) out.push_back(s.name());
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

// Realized body ReLUs per stage (stem excluded) from the layer walk.
std::vector<std::int64_t> body_relus(const std::vector<int>& blocks, const std::vector<int>& mult) {
  oracle::Net n;
  n.h = n.w = 64;
  n.m = 16;
  n.blocks = blocks;
  n.channels = channels_from_multipliers(16, mult);
  return oracle::stage_relus(n, [](const oracle::Layer& l) { return l.block >= 0; });
}

using Tuple = std::pair<std::vector<int>, std::vector<int>>;  // multipliers, blocks

std::set<Tuple> grid_oracle(const EqualizationProblem& p) {
  const std::size_t d = p.depth();
  std::set<Tuple> out;
  std::vector<std::vector<int>> lambdas{p.multipliers}, phis{p.blocks};
  auto cartesian = [](std::size_t n, IntRange r) {
    std::vector<std::vector<int>> all{{}};
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::vector<int>> next;
      for (const auto& v : all)
        for (int x = r.lo; x <= r.hi; ++x) {
          next.push_back(v);
          next.back().push_back(x);
        }
      all = std::move(next);
    }
    return all;
  };
  if (p.free_lambda()) lambdas = cartesian(d - 1, p.lambda_bounds);
  if (p.free_phi()) phis = cartesian(d, p.phi_bounds);
  for (const auto& l : lambdas)
    for (const auto& b : phis) {
      const auto r = body_relus(b, l);
      bool ok = true;
      for (std::size_t i = 0; i + 1 < d && ok; ++i)
        ok = r[static_cast<std::size_t>(p.order.stages[i] - 1)] > r[static_cast<std::size_t>(p.order.stages[i + 1] - 1)];
      if (ok) out.insert({l, b});
    }
  return out;
}

}  // namespace

TEST(Equalization, ResNet18Constraints) {
  const auto p = EqualizationProblem::width(CriticalityOrder::parse("3,2,4,1"), {2, 2, 2, 2});
  EXPECT_EQ(joined(derive_inequalities(p)), "β>4 γ<4 αβ>16 βγ<16 α>4 αβγ>64");
}

TEST(Equalization, ResNet18Selection) {
  const auto p = EqualizationProblem::width(CriticalityOrder::parse("3,2,4,1"), {2, 2, 2, 2});
  const auto r = solve(p);
  EXPECT_EQ(names(select_minimal(r)), (std::vector<std::string>{"HRN-7x5x2x", "HRN-5x5x3x", "HRN-6x6x2x", "HRN-5x7x2x"}));
  // (beta, gamma) groups and their smallest alpha.
  std::map<std::pair<int, int>, int> groups;
  for (const auto& s : r.solutions) {
    const auto key = std::pair{s.multipliers[1], s.multipliers[2]};
    groups[key] = groups.count(key) ? std::min(groups[key], s.multipliers[0]) : s.multipliers[0];
  }
  EXPECT_EQ(groups.at({5, 2}), 7);
  EXPECT_EQ(groups.at({5, 3}), 5);
  EXPECT_EQ(groups.at({6, 2}), 6);
  EXPECT_EQ(groups.at({7, 2}), 5);
}

TEST(Equalization, AlternativeOrderMinima) {
  const auto p = EqualizationProblem::width(CriticalityOrder::parse("3,4,2,1"), {2, 2, 2, 2});
  const auto n = names(pareto_minimal(solve(p)));
  EXPECT_TRUE(contains(n, "HRN-5x9x2x"));
  EXPECT_TRUE(contains(n, "HRN-5x6x3x"));
}

TEST(Equalization, ResNet34Minima) {
  const auto p = EqualizationProblem::width(CriticalityOrder::parse("3,2,4,1"), {3, 4, 6, 3});
  EXPECT_EQ(joined(derive_inequalities(p)), "β>8/3 γ<8 αβ>8 βγ<64/3 α>3 αβγ>64");
  const auto n = names(pareto_minimal(solve(p)));
  EXPECT_TRUE(contains(n, "HRN-4x6x3x"));
  EXPECT_TRUE(contains(n, "HRN-4x9x2x"));
}

TEST(Equalization, ChainBoundaryCases) {
  const auto order = CriticalityOrder::parse("3,2,4,1");
  EXPECT_TRUE(satisfies_chain({{2, 2, 2, 2}, {7, 7, 2}}, order));
  EXPECT_FALSE(satisfies_chain({{2, 2, 2, 2}, {7, 7, 3}}, order));
  // Equal weights are not a strict ordering.
  EXPECT_FALSE(satisfies_chain({{2, 2, 2, 2}, {4, 4, 4}}, CriticalityOrder::parse("1,2,3,4")));
}

TEST(Equalization, MatchesGridOracle) {
  std::mt19937 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    EqualizationProblem p;
    const int d = gen::uniform(rng, 2, 5);
    std::vector<int> perm(static_cast<std::size_t>(d));
    std::iota(perm.begin(), perm.end(), 1);
    std::shuffle(perm.begin(), perm.end(), rng);
    p.order = {perm};
    const int mode = d <= 3 ? gen::uniform(rng, 0, 2) : gen::uniform(rng, 0, 1);
    p.mode = mode == 0 ? EqualizationMode::Width : mode == 1 ? EqualizationMode::Depth : EqualizationMode::Mixed;
    const int lo = gen::uniform(rng, 2, 3);
    p.lambda_bounds = {lo, gen::uniform(rng, lo + 1, d >= 5 ? 7 : 10)};
    const int plo = gen::uniform(rng, 1, 3);
    p.phi_bounds = {plo, gen::uniform(rng, plo + 1, d >= 5 ? 7 : 10)};
    for (int k = 0; k < d; ++k) p.blocks.push_back(gen::uniform(rng, 1, 4));
    for (int k = 0; k + 1 < d; ++k) p.multipliers.push_back(gen::uniform(rng, 1, 6));
    std::set<Tuple> got;
    for (const auto& s : solve(p).solutions) got.insert({s.multipliers, s.blocks});
    EXPECT_EQ(got, grid_oracle(p)) << "trial " << trial << " order " << p.order.to_string();
  }
}

TEST(Equalization, SolutionsStayOrderedAsAlphaGrows) {
  const auto order = CriticalityOrder::parse("3,2,4,1");
  const auto p = EqualizationProblem::width(order, {2, 2, 2, 2});
  for (auto s : select_minimal(solve(p))) {
    for (int a = s.multipliers[0]; a <= 16; ++a) {
      s.multipliers[0] = a;
      EXPECT_TRUE(satisfies_chain(s, order)) << s.name();
    }
  }
}

TEST(Equalization, SolutionsRealizeTheOrder) {
  const auto order = CriticalityOrder::parse("3,2,4,1");
  for (const auto& s : solve(EqualizationProblem::width(order, {2, 2, 2, 2})).solutions) {
    const auto p = profile(synthesize(s, 16, {32, 32, 3}, 100));
    for (std::size_t i = 0; i + 1 < 4; ++i)
      EXPECT_GT(p.body_relus(static_cast<std::size_t>(order.stages[i] - 1)),
                p.body_relus(static_cast<std::size_t>(order.stages[i + 1] - 1)))
          << s.name();
  }
}

TEST(Equalization, DepthMode) {
  auto p = EqualizationProblem::depth_mode(CriticalityOrder::parse("3,2,4,1"), {2, 2, 2});
  p.phi_bounds = {1, 16};
  const auto q = derive_inequalities(p);
  EXPECT_EQ(q.front().to_string(), "φ3>2φ2");
  const auto r = solve(p);
  ASSERT_TRUE(r.feasible());
  for (const auto& s : r.solutions) EXPECT_EQ(s.multipliers, (std::vector<int>{2, 2, 2}));
}

TEST(Equalization, InfeasibleWithinBounds) {
  auto p = EqualizationProblem::width(CriticalityOrder::parse("3,2,4,1"), {2, 2, 2, 2});
  p.lambda_bounds = {2, 4};
  EXPECT_FALSE(solve(p).feasible());
}

TEST(Equalization, ProblemValidation) {
  EXPECT_THROW(EqualizationProblem::width(CriticalityOrder::parse("1"), {2}), DomainError);
  EXPECT_THROW(EqualizationProblem::width(CriticalityOrder::parse("3,2,4,1"), {2, 2, 2}), DomainError);
  auto p = EqualizationProblem::width(CriticalityOrder::parse("3,2,4,1"), {2, 2, 2, 2});
  p.lambda_bounds = {5, 4};
  EXPECT_THROW(solve(p), DomainError);
  auto big = EqualizationProblem::depth_mode(CriticalityOrder::parse("1,2,3,4,5,6"), {2, 2, 2, 2, 2});
  big.mode = EqualizationMode::Mixed;
  big.lambda_bounds = {2, 16};
  EXPECT_THROW(solve(big), DomainError);
}

TEST(Equalization, LowReluVariant) {
  const EqualizationSolution s{{2, 2, 2, 2}, {5, 5, 3}};
  EXPECT_EQ(low_relu_variant(s).name(), "HRN-2x5x3x");
  const auto spec = synthesize(s, 16, {32, 32, 3}, 100);
  EXPECT_EQ(spec.name, "HRN-5x5x3x(m=16)");
  const auto low = low_relu_variant(spec);
  EXPECT_EQ(low.name, "HRN-2x5x3x(m=16)");
  EXPECT_EQ(profile(low).total_relus, 186368);
}

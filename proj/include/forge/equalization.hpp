#pragma once

// ReLU equalization: choose stagewise channel multipliers (width mode),
// stage block counts (depth mode) or both so that the stages' ReLU counts
// follow their criticality order.
//
// With block counts phi_k and multipliers lambda_j, stage k holds ReLUs in
// proportion to w_k = phi_k * prod_{j<k} lambda_j / 4^(k-1). A tuple is
// feasible when w strictly decreases along the criticality order.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "forge/criticality.hpp"
#include "forge/error.hpp"
#include "forge/network_ir.hpp"
#include "forge/units.hpp"

namespace forge {

enum class EqualizationMode { Width, Depth, Mixed };

inline EqualizationMode parse_mode(const std::string& s) {
  if (s == "width") return EqualizationMode::Width;
  if (s == "depth") return EqualizationMode::Depth;
  if (s == "mixed") return EqualizationMode::Mixed;
  throw DomainError("unknown equalization mode '" + s + "' (expected width, depth or mixed)");
}

struct IntRange {
  int lo = 2;
  int hi = 16;

  int size() const { return hi - lo + 1; }
};

struct EqualizationProblem {
  CriticalityOrder order;
  EqualizationMode mode = EqualizationMode::Width;
  std::vector<int> blocks;       // phi_1..phi_D; fixed unless the mode frees them
  std::vector<int> multipliers;  // lambda_1..lambda_{D-1}; fixed unless the mode frees them
  IntRange lambda_bounds{2, 16};
  IntRange phi_bounds{1, 16};

  std::size_t depth() const { return order.size(); }
  bool free_lambda() const { return mode != EqualizationMode::Depth; }
  bool free_phi() const { return mode != EqualizationMode::Width; }

  static EqualizationProblem width(CriticalityOrder order, std::vector<int> blocks) {
    EqualizationProblem p;
    p.order = std::move(order);
    p.mode = EqualizationMode::Width;
    p.blocks = std::move(blocks);
    p.check();
    return p;
  }

  static EqualizationProblem depth_mode(CriticalityOrder order, std::vector<int> multipliers) {
    EqualizationProblem p;
    p.order = std::move(order);
    p.mode = EqualizationMode::Depth;
    p.multipliers = std::move(multipliers);
    p.check();
    return p;
  }

  void check() const {
    const std::size_t d = depth();
    if (d < 2 || d > 6) throw DomainError("equalization needs 2 to 6 stages, got " + std::to_string(d));
    order.check(d);
    if (!free_phi() && blocks.size() != d)
      throw DomainError("expected " + std::to_string(d) + " fixed block counts, got " + std::to_string(blocks.size()));
    if (!free_lambda() && multipliers.size() != d - 1)
      throw DomainError("expected " + std::to_string(d - 1) + " fixed multipliers, got " +
                        std::to_string(multipliers.size()));
    for (int b : blocks)
      if (!free_phi() && b < 1) throw DomainError("block counts must be >= 1");
    for (int m : multipliers)
      if (!free_lambda() && m < 1) throw DomainError("multipliers must be >= 1");
    for (const auto& r : {lambda_bounds, phi_bounds})
      if (r.lo < 1 || r.hi < r.lo) throw DomainError("bounds must be nonempty and >= 1");
  }
};

// Variable names: alpha, beta, gamma for up to three multipliers, lambda_j
// beyond; phi_k for block counts.
inline std::string lambda_name(std::size_t j, std::size_t depth) {
  static const char* greek[] = {"α", "β", "γ"};
  if (depth <= 4 && j >= 1 && j <= 3) return greek[j - 1];
  return "λ" + std::to_string(j);
}
inline std::string phi_name(std::size_t k) { return "φ" + std::to_string(k); }

// A product of free variables with positive integer exponents.
struct Monomial {
  std::vector<std::pair<std::string, int>> factors;

  bool empty() const { return factors.empty(); }
  std::string to_string() const {
    std::string s;
    for (const auto& [name, e] : factors) {
      s += name;
      if (e > 1) s += "^" + std::to_string(e);
    }
    return s;
  }
};

// lhs REL constant * rhs, with lhs and rhs monomials over free variables.
struct Inequality {
  int more_critical = 0;
  int less_critical = 0;
  Monomial lhs;
  bool greater = true;
  Ratio constant;
  Monomial rhs;

  std::string to_string() const {
    std::string s = lhs.empty() ? "1" : lhs.to_string();
    s += greater ? ">" : "<";
    if (rhs.empty()) return s + constant.to_string();
    if (constant == Ratio(1)) return s + rhs.to_string();
    return s + (constant.is_integer() ? constant.to_string() : "(" + constant.to_string() + ")") + rhs.to_string();
  }
};

namespace detail {

// Stage weight numerator/denominator with free variables symbolic:
// coefficient * prod(var^exp) / 4^(k-1).
struct SymbolicWeight {
  std::int64_t coeff = 1;
  std::int64_t denom = 1;
  std::map<std::string, int> exps;
};

inline SymbolicWeight symbolic_weight(const EqualizationProblem& p, std::size_t k) {
  SymbolicWeight w;
  const std::size_t d = p.depth();
  if (p.free_phi())
    w.exps[phi_name(k + 1)] += 1;
  else
    w.coeff *= p.blocks[k];
  for (std::size_t j = 0; j < k; ++j) {
    if (p.free_lambda())
      w.exps[lambda_name(j + 1, d)] += 1;
    else
      w.coeff *= p.multipliers[j];
    w.denom *= 4;
  }
  return w;
}

// Orders variable names the way the problem lists them: lambdas, then phis.
inline std::vector<std::string> variable_order(const EqualizationProblem& p) {
  std::vector<std::string> v;
  if (p.free_lambda())
    for (std::size_t j = 1; j < p.depth(); ++j) v.push_back(lambda_name(j, p.depth()));
  if (p.free_phi())
    for (std::size_t k = 1; k <= p.depth(); ++k) v.push_back(phi_name(k));
  return v;
}

}  // namespace detail

// Every pairwise consequence w(C[i]) > w(C[j]), i before j in the order,
// reduced to free-variable monomials against a rational constant.
inline std::vector<Inequality> derive_inequalities(const EqualizationProblem& p) {
  p.check();
  const auto names = detail::variable_order(p);
  std::vector<Inequality> out;
  const auto& c = p.order.stages;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      const auto a = detail::symbolic_weight(p, static_cast<std::size_t>(c[i] - 1));
      const auto b = detail::symbolic_weight(p, static_cast<std::size_t>(c[j] - 1));
      // a.coeff/a.denom * A > b.coeff/b.denom * B  =>  A/B > K
      const Ratio k(b.coeff * a.denom, b.denom * a.coeff);
      Monomial pos, neg;
      for (const auto& name : names) {
        const int e = (a.exps.count(name) ? a.exps.at(name) : 0) - (b.exps.count(name) ? b.exps.at(name) : 0);
        if (e > 0) pos.factors.push_back({name, e});
        if (e < 0) neg.factors.push_back({name, -e});
      }
      Inequality q;
      q.more_critical = c[i];
      q.less_critical = c[j];
      if (!pos.empty() || neg.empty()) {
        q.lhs = pos;
        q.greater = true;
        q.constant = k;
        q.rhs = neg;
      } else {
        q.lhs = neg;
        q.greater = false;
        q.constant = Ratio(k.den, k.num);
      }
      out.push_back(std::move(q));
    }
  }
  return out;
}

struct EqualizationSolution {
  std::vector<int> blocks;
  std::vector<int> multipliers;

  // Relative stage ReLU weights phi_k prod_{j<k} lambda_j / 4^(k-1).
  std::vector<double> weights() const {
    std::vector<double> w;
    double width = 1, area = 1;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      if (k > 0) {
        width *= multipliers[k - 1];
        area *= 4;
      }
      w.push_back(blocks[k] * width / area);
    }
    return w;
  }

  std::string name() const { return hrn_name(multipliers); }

  friend bool operator==(const EqualizationSolution&, const EqualizationSolution&) = default;
};

// Exact test of the strict chain w(C[1]) > ... > w(C[D]).
inline bool satisfies_chain(const EqualizationSolution& s, const CriticalityOrder& order) {
  const std::size_t d = s.blocks.size();
  // w_k * 4^(D-1) is an integer.
  std::vector<std::int64_t> scaled(d);
  std::int64_t width = 1;
  for (std::size_t k = 0; k < d; ++k) {
    if (k > 0) width *= s.multipliers[k - 1];
    scaled[k] = s.blocks[k] * width * (std::int64_t{1} << (2 * (d - 1 - k)));
  }
  for (std::size_t i = 0; i + 1 < order.stages.size(); ++i)
    if (!(scaled[static_cast<std::size_t>(order.stages[i] - 1)] > scaled[static_cast<std::size_t>(order.stages[i + 1] - 1)]))
      return false;
  return true;
}

struct EqualizationResult {
  EqualizationProblem problem;
  std::vector<EqualizationSolution> solutions;

  bool feasible() const { return !solutions.empty(); }

  // Free variables of a solution, in problem order.
  std::vector<int> free_values(const EqualizationSolution& s) const {
    std::vector<int> v;
    if (problem.free_lambda()) v.insert(v.end(), s.multipliers.begin(), s.multipliers.end());
    if (problem.free_phi()) v.insert(v.end(), s.blocks.begin(), s.blocks.end());
    return v;
  }

  // All free variables but the first; solutions sharing it form a group.
  std::vector<int> group_key(const EqualizationSolution& s) const {
    auto v = free_values(s);
    v.erase(v.begin());
    return v;
  }
};

// Exhaustive search over the bounded grid of free variables. Solutions are
// sorted by group key, then by the first free variable.
inline EqualizationResult solve(const EqualizationProblem& p) {
  p.check();
  const std::size_t d = p.depth();
  const std::size_t n_lambda = p.free_lambda() ? d - 1 : 0;
  const std::size_t n_phi = p.free_phi() ? d : 0;
  std::vector<IntRange> ranges(n_lambda, p.lambda_bounds);
  ranges.insert(ranges.end(), n_phi, p.phi_bounds);
  double grid = 1;
  for (const auto& r : ranges) grid *= r.size();
  if (grid > 5e7) throw DomainError("search grid of " + std::to_string(static_cast<long long>(grid)) + " points is too large; tighten the bounds");

  EqualizationResult result{p, {}};
  std::vector<int> x;
  for (const auto& r : ranges) x.push_back(r.lo);
  for (;;) {
    EqualizationSolution s;
    s.multipliers = n_lambda ? std::vector<int>(x.begin(), x.begin() + static_cast<long>(n_lambda)) : p.multipliers;
    s.blocks = n_phi ? std::vector<int>(x.begin() + static_cast<long>(n_lambda), x.end()) : p.blocks;
    if (satisfies_chain(s, p.order)) result.solutions.push_back(std::move(s));
    std::size_t i = 0;
    while (i < x.size() && x[i] == ranges[i].hi) {
      x[i] = ranges[i].lo;
      ++i;
    }
    if (i == x.size()) break;
    ++x[i];
  }
  std::sort(result.solutions.begin(), result.solutions.end(),
            [&](const EqualizationSolution& a, const EqualizationSolution& b) {
              const auto ka = result.group_key(a), kb = result.group_key(b);
              if (ka != kb) return ka < kb;
              return result.free_values(a) < result.free_values(b);
            });
  return result;
}

// The smallest first free variable (alpha in width mode) in each group.
inline std::vector<EqualizationSolution> select_minimal(const EqualizationResult& r) {
  std::vector<EqualizationSolution> out;
  for (const auto& s : r.solutions)
    if (out.empty() || r.group_key(out.back()) != r.group_key(s)) out.push_back(s);
  return out;
}

// Solutions not componentwise >= another solution in every free variable.
inline std::vector<EqualizationSolution> pareto_minimal(const EqualizationResult& r) {
  std::vector<EqualizationSolution> out;
  for (const auto& s : r.solutions) {
    const auto v = r.free_values(s);
    const bool covered = std::any_of(r.solutions.begin(), r.solutions.end(), [&](const EqualizationSolution& t) {
      const auto u = r.free_values(t);
      return u != v && std::equal(u.begin(), u.end(), v.begin(), [](int a, int b) { return a <= b; });
    });
    if (!covered) out.push_back(s);
  }
  return out;
}

// Network realizing a solution at base width m.
inline NetworkSpec synthesize(const EqualizationSolution& s, int m, InputShape input, int num_classes,
                              const std::string& suffix = {}) {
  std::string name = hrn_name(s.multipliers) + "(m=" + std::to_string(m) + ")";
  if (!suffix.empty()) name += "-" + suffix;
  return build_network(std::move(name), input, num_classes, m, s.blocks, channels_from_multipliers(m, s.multipliers));
}

// Same tuple with the first multiplier set to 2.
inline EqualizationSolution low_relu_variant(EqualizationSolution s) {
  if (s.multipliers.empty()) throw DomainError("a single-stage network has no multipliers");
  s.multipliers.front() = 2;
  return s;
}

// Spec with the Stage1 -> Stage2 multiplier set to 2, later multipliers and
// the ReLU layout unchanged.
inline NetworkSpec low_relu_variant(const NetworkSpec& spec) {
  auto mult = stage_multipliers(spec);
  if (!mult || mult->empty()) throw DomainError("'" + spec.name + "' has no integral stagewise multipliers");
  if (mult->front() == 2) return spec;
  mult->front() = 2;
  NetworkSpec out = spec;
  const auto ch = channels_from_multipliers(spec.stages[0].channels, *mult);
  for (std::size_t k = 0; k < out.depth(); ++k) out.stages[k].channels = ch[k];
  std::string rest;
  if (const auto pos = spec.name.find("(m="); pos != std::string::npos) rest = spec.name.substr(pos);
  out.name = hrn_name(*mult) + rest;
  validate(out);
  return out;
}

}  // namespace forge

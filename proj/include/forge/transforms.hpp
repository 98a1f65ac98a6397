#pragma once

// Coarse-grained ReLU optimizations as spec-to-spec rewrites, and the
// one-pass plan that derives a family of low-ReLU variants from a network.

#include <algorithm>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "forge/accounting.hpp"
#include "forge/criticality.hpp"
#include "forge/error.hpp"
#include "forge/network_ir.hpp"
#include "forge/units.hpp"

namespace forge {

namespace detail {

inline void check_stage(const NetworkSpec& spec, int stage) {
  if (stage < 1 || static_cast<std::size_t>(stage) > spec.depth())
    throw DomainError("unknown stage S" + std::to_string(stage) + " (network has " + std::to_string(spec.depth()) +
                      " stages)");
}

}  // namespace detail

// Removes every ReLU of `stage` (1-based), the stem ReLU included for S1.
// Convolutions are kept.
inline NetworkSpec cull(NetworkSpec spec, int stage) {
  detail::check_stage(spec, stage);
  for (auto& site : spec.stages[static_cast<std::size_t>(stage - 1)].relu_layout) site.active = false;
  return spec;
}

// Drops alternate ReLU layers in the selected stages: the stem ReLU and each
// block's first ReLU go, each block's second (post-addition) ReLU stays.
inline NetworkSpec thin(NetworkSpec spec, const std::vector<int>& stages) {
  for (int s : stages) detail::check_stage(spec, s);
  for (int s : stages) {
    const auto k = static_cast<std::size_t>(s - 1);
    for (auto& site : spec.stages[k].relu_layout)
      if (is_stem_site(k, site.site) || site_position_in_block(k, site.site) == 0) site.active = false;
  }
  return spec;
}

inline NetworkSpec thin_all(NetworkSpec spec) {
  std::vector<int> all(spec.depth());
  std::iota(all.begin(), all.end(), 1);
  return thin(std::move(spec), all);
}

// Multiplies the stem and every stage's channel count by `factor`.
inline NetworkSpec scale_channels(NetworkSpec spec, Ratio factor) {
  if (factor.num <= 0) throw DomainError("channel scale factor must be positive");
  auto scale = [&](int c, const std::string& what) {
    const std::int64_t n = static_cast<std::int64_t>(c) * factor.num;
    if (n % factor.den != 0)
      throw DomainError(what + " has " + std::to_string(c) + " channels; scaling by " + factor.to_string() +
                        " is not integral");
    return static_cast<int>(n / factor.den);
  };
  spec.base_channels = scale(spec.base_channels, "stem");
  for (std::size_t k = 0; k < spec.depth(); ++k)
    spec.stages[k].channels = scale(spec.stages[k].channels, "stage " + std::to_string(k + 1));
  validate(spec);
  return spec;
}

// Applies ReLUs to a 1/N channel slice at every active site. N in {4, 8, 16}
// uses the three-partition layer; N == 2 the two-group split.
inline NetworkSpec relu_reuse(NetworkSpec spec, int n) {
  if (n == 1 || !supported_reuse_factor(n))
    throw DomainError("ReLU-reuse factor must be 2, 4, 8 or 16, got " + std::to_string(n));
  for (std::size_t k = 0; k < spec.depth(); ++k) {
    for (auto& site : spec.stages[k].relu_layout) {
      if (!site.active) continue;
      const int c = site_channels(spec, k, site.site);
      if (c % reuse_divisor(n) != 0)
        throw DomainError("stage " + std::to_string(k + 1) + " site " + std::to_string(site.site) + " has " +
                          std::to_string(c) + " channels, not divisible by " + std::to_string(reuse_divisor(n)) +
                          " as ReLU-reuse N=" + std::to_string(n) + " requires");
      site.reuse_n = n;
    }
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Plans

enum class StepKind { Cull, Thin, Scale, Reuse };

struct TransformStep {
  StepKind kind = StepKind::Thin;
  std::vector<int> stages;  // Cull: one stage; Thin: the selected stages
  Ratio factor;             // Scale
  int reuse_n = 0;          // Reuse
  std::string note;

  // "cull:1", "thin:2,3,4", "scale:1/2", "reuse:4"
  std::string to_string() const {
    auto list = [&] {
      std::string s;
      for (std::size_t i = 0; i < stages.size(); ++i) s += (i ? "," : "") + std::to_string(stages[i]);
      return s;
    };
    switch (kind) {
      case StepKind::Cull: return "cull:" + list();
      case StepKind::Thin: return "thin:" + list();
      case StepKind::Scale: return "scale:" + factor.to_string();
      case StepKind::Reuse: return "reuse:" + std::to_string(reuse_n);
    }
    return {};
  }

  static TransformStep parse(const std::string& token) {
    const auto colon = token.find(':');
    if (colon == std::string::npos) throw DomainError("transform step '" + token + "' lacks ':'");
    const std::string op = token.substr(0, colon);
    const std::string arg = token.substr(colon + 1);
    auto ints = [&] {
      std::vector<int> out;
      std::stringstream ss(arg);
      std::string part;
      while (std::getline(ss, part, ',')) {
        try {
          out.push_back(std::stoi(part));
        } catch (const std::exception&) {
          throw DomainError("invalid stage list in '" + token + "'");
        }
      }
      if (out.empty()) throw DomainError("empty stage list in '" + token + "'");
      return out;
    };
    TransformStep s;
    if (op == "cull") {
      s.kind = StepKind::Cull;
      s.stages = ints();
      if (s.stages.size() != 1) throw DomainError("cull takes exactly one stage");
    } else if (op == "thin") {
      s.kind = StepKind::Thin;
      s.stages = ints();
    } else if (op == "scale") {
      s.kind = StepKind::Scale;
      s.factor = Ratio::parse(arg);
    } else if (op == "reuse") {
      s.kind = StepKind::Reuse;
      s.reuse_n = ints().front();
    } else {
      throw DomainError("unknown transform '" + op + "'");
    }
    return s;
  }
};

struct TransformPlan {
  std::vector<TransformStep> steps;

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < steps.size(); ++i) s += (i ? " " : "") + steps[i].to_string();
    return s.empty() ? "base" : s;
  }

  // Space-separated steps; "base" or "" is the empty plan.
  static TransformPlan parse(const std::string& text) {
    TransformPlan p;
    std::stringstream ss(text);
    std::string tok;
    while (ss >> tok)
      if (tok != "base") p.steps.push_back(TransformStep::parse(tok));
    p.check();
    return p;
  }

  void check() const {
    const auto culls = std::count_if(steps.begin(), steps.end(), [](const auto& s) { return s.kind == StepKind::Cull; });
    if (culls > 1) throw DomainError("a plan may cull at most one stage");
  }
};

inline NetworkSpec apply(const NetworkSpec& spec, const TransformStep& step) {
  switch (step.kind) {
    case StepKind::Cull: return cull(spec, step.stages.front());
    case StepKind::Thin: return thin(spec, step.stages);
    case StepKind::Scale: return scale_channels(spec, step.factor);
    case StepKind::Reuse: return relu_reuse(spec, step.reuse_n);
  }
  return spec;
}

inline NetworkSpec apply(NetworkSpec spec, const TransformPlan& plan) {
  plan.check();
  for (const auto& step : plan.steps) spec = apply(spec, step);
  return spec;
}

struct PlannedVariant {
  TransformPlan plan;
  NetworkSpec spec;
  StageProfile profile;
};

// One pass: cull the least critical stage if it holds the most ReLUs, thin
// the remaining stages, then branch the thinned network into a half-width
// variant and reuse variants with N = 4, 8, 16. Sorted by ReLU count,
// largest first. Variants whose channels cannot be halved or split are
// skipped.
inline std::vector<PlannedVariant> generate_plan(const NetworkSpec& spec, const CriticalityOrder& order) {
  order.check(spec.depth());
  std::vector<PlannedVariant> out;
  auto add = [&](TransformPlan plan) {
    try {
      auto s = apply(spec, plan);
      auto p = profile(s);
      out.push_back({std::move(plan), std::move(s), std::move(p)});
    } catch (const DomainError&) {
    }
  };

  add({});
  TransformPlan base;
  std::vector<int> remaining(spec.depth());
  std::iota(remaining.begin(), remaining.end(), 1);
  const int least = order.least_critical();
  if (dominates(spec, least)) {
    base.steps.push_back({StepKind::Cull, {least}, {}, 0, "least critical stage holds the most ReLUs"});
    std::erase(remaining, least);
  }
  if (!remaining.empty()) base.steps.push_back({StepKind::Thin, remaining, {}, 0, "remaining stages"});
  if (!base.steps.empty()) add(base);

  auto scaled = base;
  scaled.steps.push_back({StepKind::Scale, {}, Ratio(1, 2), 0, "half width"});
  add(scaled);
  for (int n : {4, 8, 16}) {
    auto reused = base;
    reused.steps.push_back({StepKind::Reuse, {}, {}, n, "ReLU reuse"});
    add(reused);
  }
  std::stable_sort(out.begin(), out.end(), [](const PlannedVariant& a, const PlannedVariant& b) {
    return a.profile.total_relus > b.profile.total_relus;
  });
  return out;
}

}  // namespace forge

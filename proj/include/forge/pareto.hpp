#pragma once

// Non-dominated frontiers over design points and baseline-vs-ours
// improvement rows.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "forge/csv.hpp"
#include "forge/error.hpp"
#include "forge/pi_cost.hpp"
#include "forge/units.hpp"

namespace forge {

enum class PointSource { Ours, External };

struct DesignPoint {
  std::string label;
  double relus = 0;
  double flops = 0;  // MACs
  std::optional<double> accuracy;
  std::optional<CostEstimate> cost;
  PointSource source = PointSource::Ours;
  std::string match;  // label of the point this one is compared against, if pinned
};

enum class Objective { Relus, Flops, Accuracy, Latency };

inline Objective parse_objective(const std::string& s) {
  if (s == "relus") return Objective::Relus;
  if (s == "flops") return Objective::Flops;
  if (s == "acc" || s == "accuracy") return Objective::Accuracy;
  if (s == "latency" || s == "lat") return Objective::Latency;
  throw DomainError("unknown objective '" + s + "' (expected relus, flops, acc or latency)");
}

namespace detail {

// Value oriented so that larger is better.
inline double goodness(const DesignPoint& p, Objective o) {
  switch (o) {
    case Objective::Relus: return -p.relus;
    case Objective::Flops: return -p.flops;
    case Objective::Accuracy:
      if (!p.accuracy) throw DomainError("point '" + p.label + "' has no accuracy");
      return *p.accuracy;
    case Objective::Latency:
      if (!p.cost) throw DomainError("point '" + p.label + "' has no cost estimate");
      return -p.cost->total_seconds;
  }
  return 0;
}

}  // namespace detail

// a is at least as good as b on every objective and strictly better on one.
inline bool dominates(const DesignPoint& a, const DesignPoint& b, const std::vector<Objective>& objectives) {
  bool strictly = false;
  for (auto o : objectives) {
    const double x = detail::goodness(a, o), y = detail::goodness(b, o);
    if (x < y) return false;
    if (x > y) strictly = true;
  }
  return strictly;
}

// Points no other point dominates. Points equal on every objective collapse
// to the one with the smallest label. Ordered by ascending ReLUs, then label.
inline std::vector<DesignPoint> frontier(const std::vector<DesignPoint>& points, const std::vector<Objective>& objectives) {
  if (objectives.empty()) throw DomainError("no objectives selected");
  auto same = [&](const DesignPoint& a, const DesignPoint& b) {
    return std::all_of(objectives.begin(), objectives.end(),
                       [&](Objective o) { return detail::goodness(a, o) == detail::goodness(b, o); });
  };
  std::vector<DesignPoint> out;
  for (const auto& p : points) {
    const bool dominated =
        std::any_of(points.begin(), points.end(), [&](const DesignPoint& q) { return dominates(q, p, objectives); });
    if (dominated) continue;
    const bool shadowed = std::any_of(points.begin(), points.end(), [&](const DesignPoint& q) {
      return &q != &p && same(q, p) && (q.label < p.label || (q.label == p.label && &q < &p));
    });
    if (!shadowed) out.push_back(p);
  }
  std::sort(out.begin(), out.end(), [](const DesignPoint& a, const DesignPoint& b) {
    if (a.relus != b.relus) return a.relus < b.relus;
    return a.label < b.label;
  });
  return out;
}

// baseline / ours for counts and times, ours - baseline for accuracy.
struct ImprovementRow {
  double relu_ratio = 1;
  double flop_ratio = 1;
  std::optional<double> acc_delta;
  double he_ratio = 1;
  double gc_ratio = 1;
  double lat_ratio = 1;

  ImprovementRow rounded() const {
    ImprovementRow r = *this;
    for (double* x : {&r.relu_ratio, &r.flop_ratio, &r.he_ratio, &r.gc_ratio, &r.lat_ratio}) *x = round_to(*x, 1);
    if (r.acc_delta) r.acc_delta = round_to(*r.acc_delta, 1);
    return r;
  }
};

inline ImprovementRow iso_compare(const DesignPoint& baseline, const DesignPoint& ours) {
  for (const auto* p : {&baseline, &ours})
    if (!p->cost) throw DomainError("point '" + p->label + "' has no cost estimate");
  auto ratio = [](double b, double o) {
    if (b == o) return 1.0;
    if (!(o > 0)) throw DomainError("cannot form a ratio against a zero count");
    return b / o;
  };
  ImprovementRow r;
  r.relu_ratio = ratio(baseline.relus, ours.relus);
  r.flop_ratio = ratio(baseline.flops, ours.flops);
  r.he_ratio = ratio(baseline.cost->he_seconds, ours.cost->he_seconds);
  r.gc_ratio = ratio(baseline.cost->gc_seconds, ours.cost->gc_seconds);
  r.lat_ratio = ratio(baseline.cost->total_seconds, ours.cost->total_seconds);
  if (baseline.accuracy && ours.accuracy) r.acc_delta = *ours.accuracy - *baseline.accuracy;
  return r;
}

struct ComparisonRow {
  DesignPoint baseline;
  DesignPoint ours;
  ImprovementRow improvement;
};

// Pairs every baseline with one of our points: the one named in its match
// column if given, otherwise the lowest-latency point that is at least as
// accurate. Baselines with no admissible partner are skipped.
inline std::vector<ComparisonRow> compare_points(const std::vector<DesignPoint>& baselines,
                                                 const std::vector<DesignPoint>& ours) {
  std::vector<ComparisonRow> rows;
  for (const auto& b : baselines) {
    const DesignPoint* pick = nullptr;
    if (!b.match.empty()) {
      for (const auto& o : ours)
        if (o.label == b.match) pick = &o;
      if (!pick) throw DomainError("baseline '" + b.label + "' names unknown point '" + b.match + "'");
    } else {
      for (const auto& o : ours) {
        if (!o.accuracy || !b.accuracy || *o.accuracy < *b.accuracy || !o.cost) continue;
        if (!pick || o.cost->total_seconds < pick->cost->total_seconds ||
            (o.cost->total_seconds == pick->cost->total_seconds && o.label < pick->label))
          pick = &o;
      }
      if (!pick) continue;
    }
    rows.push_back({b, *pick, iso_compare(b, *pick)});
  }
  return rows;
}

// Results CSV: label,relus,flops_m,acc[,match]; relus may carry a K suffix.
inline std::vector<DesignPoint> points_from_csv(const CsvTable& t, PointSource source) {
  std::vector<DesignPoint> out;
  for (const auto& row : t.rows) {
    DesignPoint p;
    p.label = row.text("label");
    p.relus = row.number("relus");
    p.flops = row.number("flops_m") * 1e6;
    if (row.has("acc")) {
      p.accuracy = row.number("acc");
      if (*p.accuracy < 0 || *p.accuracy > 100) throw ParseError("accuracy outside [0, 100]", row.line, "acc");
    }
    if (p.relus < 0 || p.flops < 0) throw ParseError("negative count", row.line);
    p.source = source;
    if (row.has("match")) p.match = row.text("match");
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<DesignPoint> load_points(const std::string& path, PointSource source) {
  return points_from_csv(load_csv(path, {"label", "relus", "flops_m"}), source);
}

inline void attach_costs(std::vector<DesignPoint>& points, const CostCalibration& calib) {
  for (auto& p : points) p.cost = estimate(p.relus, p.flops, calib);
}

}  // namespace forge

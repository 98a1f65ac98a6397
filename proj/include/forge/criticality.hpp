#pragma once

// Stage criticality ordering from externally measured probe accuracies.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "forge/accounting.hpp"
#include "forge/csv.hpp"
#include "forge/error.hpp"
#include "forge/network_ir.hpp"

namespace forge {

// Accuracy of a network that keeps ReLUs only in `stage` (1-based).
struct StageProbe {
  int stage = 1;
  std::int64_t relus = 0;
  double acc = 0;
  std::optional<double> acc_kd;
};

// Stage ids (1-based), most critical first.
struct CriticalityOrder {
  std::vector<int> stages;

  int most_critical() const { return stages.front(); }
  int least_critical() const { return stages.back(); }
  std::size_t size() const { return stages.size(); }

  // "S3>S2>S4>S1"
  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < stages.size(); ++i) s += (i ? ">S" : "S") + std::to_string(stages[i]);
    return s;
  }

  // "3,2,4,1" or "S3>S2>S4>S1".
  static CriticalityOrder parse(const std::string& text) {
    CriticalityOrder o;
    std::string num;
    auto flush = [&] {
      if (num.empty()) return;
      o.stages.push_back(std::stoi(num));
      num.clear();
    };
    for (char c : text) {
      if (std::isdigit(static_cast<unsigned char>(c)))
        num += c;
      else if (c == ',' || c == '>' || c == ' ')
        flush();
      else if (c != 'S' && c != 's')
        throw DomainError("invalid criticality order '" + text + "'");
    }
    flush();
    o.check(o.stages.size());
    return o;
  }

  // Must be a permutation of 1..depth.
  void check(std::size_t depth) const {
    if (stages.size() != depth)
      throw DomainError("criticality order lists " + std::to_string(stages.size()) + " stages, network has " +
                        std::to_string(depth));
    std::vector<int> sorted = stages;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
      if (sorted[i] != static_cast<int>(i + 1)) throw DomainError("criticality order is not a permutation of the stages");
  }

  friend bool operator==(const CriticalityOrder&, const CriticalityOrder&) = default;
};

// Higher accuracy means more critical; ties go to the stage reaching it with
// fewer ReLUs, then to the lower stage id.
inline CriticalityOrder rank(const std::vector<StageProbe>& probes, bool use_kd) {
  if (probes.empty()) throw DomainError("no stage probes");
  std::set<int> seen;
  for (const auto& p : probes) {
    if (!seen.insert(p.stage).second) throw DomainError("duplicate probe for stage " + std::to_string(p.stage));
    if (use_kd && !p.acc_kd) throw DomainError("stage " + std::to_string(p.stage) + " has no KD accuracy");
  }
  auto acc = [&](const StageProbe& p) { return use_kd ? *p.acc_kd : p.acc; };
  std::vector<StageProbe> sorted = probes;
  std::sort(sorted.begin(), sorted.end(), [&](const StageProbe& a, const StageProbe& b) {
    if (acc(a) != acc(b)) return acc(a) > acc(b);
    if (a.relus != b.relus) return a.relus < b.relus;
    return a.stage < b.stage;
  });
  CriticalityOrder o;
  for (const auto& p : sorted) o.stages.push_back(p.stage);
  return o;
}

// True when `stage` (1-based) holds at least as many ReLUs as every other
// stage.
inline bool dominates(const NetworkSpec& spec, int stage) {
  if (stage < 1 || static_cast<std::size_t>(stage) > spec.depth())
    throw DomainError("unknown stage S" + std::to_string(stage));
  const auto r = stage_relus(spec).per_stage;
  const auto mine = r[static_cast<std::size_t>(stage - 1)];
  return std::all_of(r.begin(), r.end(), [&](std::int64_t x) { return mine >= x; });
}

inline std::vector<StageProbe> probes_from_csv(const CsvTable& table) {
  std::vector<StageProbe> out;
  for (const auto& row : table.rows) {
    StageProbe p;
    p.stage = row.integer("stage");
    p.relus = static_cast<std::int64_t>(std::llround(row.number("relus")));
    p.acc = row.number("acc");
    if (row.has("acc_kd")) p.acc_kd = row.number("acc_kd");
    for (double a : {p.acc, p.acc_kd.value_or(0.0)})
      if (a < 0 || a > 100) throw ParseError("accuracy outside [0, 100]", row.line, "acc");
    out.push_back(p);
  }
  return out;
}

inline std::vector<StageProbe> load_probes(const std::string& path) {
  return probes_from_csv(load_csv(path, {"stage", "relus", "acc"}));
}

}  // namespace forge

#pragma once

// Private-inference cost model: garbled-circuit time and storage linear in
// the ReLU count, homomorphic-encryption time read off a table of measured
// (FLOPs, seconds) anchors for the input size at hand.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "forge/accounting.hpp"
#include "forge/csv.hpp"
#include "forge/error.hpp"
#include "forge/network_ir.hpp"

namespace forge {

struct HeAnchor {
  double flops = 0;  // MACs
  double seconds = 0;
  std::string label;
};

enum class Interpolation { LogLinear, Nearest };

struct CostCalibration {
  double gc_seconds_per_kilorelu = 0.1123;
  double gc_storage_per_relu = 18.0 * 1024.0;  // bytes
  std::vector<HeAnchor> he_anchors;
  Interpolation interpolation = Interpolation::LogLinear;

  // Sorts anchors by FLOPs and checks the table is usable.
  void normalize() {
    if (!(gc_seconds_per_kilorelu > 0)) throw DomainError("GC seconds per K-ReLU must be positive");
    if (gc_storage_per_relu < 0) throw DomainError("GC storage per ReLU must be nonnegative");
    std::sort(he_anchors.begin(), he_anchors.end(), [](const auto& a, const auto& b) { return a.flops < b.flops; });
    for (std::size_t i = 0; i < he_anchors.size(); ++i) {
      if (!(he_anchors[i].flops > 0) || !(he_anchors[i].seconds > 0))
        throw DomainError("HE anchors need positive FLOPs and seconds");
      if (i > 0 && he_anchors[i].flops == he_anchors[i - 1].flops)
        throw DomainError("duplicate HE anchor at " + std::to_string(he_anchors[i].flops / 1e6) + "M FLOPs");
    }
  }
};

struct HeEstimate {
  double seconds = 0;
  bool extrapolated = false;
};

struct CostEstimate {
  double gc_seconds = 0;
  double he_seconds = 0;
  double total_seconds = 0;
  double storage_bytes = 0;
  bool he_extrapolated = false;
};

inline double gc_latency(double relus, const CostCalibration& calib) {
  if (relus < 0) throw DomainError("negative ReLU count");
  return relus / 1000.0 * calib.gc_seconds_per_kilorelu;
}

inline double storage(double relus, const CostCalibration& calib) {
  if (relus < 0) throw DomainError("negative ReLU count");
  return relus * calib.gc_storage_per_relu;
}

// Exact at anchors, log-log linear (or nearest) between them; outside the
// anchor range the nearest anchor's seconds-per-FLOP is kept and the result
// flagged as extrapolated.
inline HeEstimate he_latency(double flops, const CostCalibration& calib) {
  const auto& a = calib.he_anchors;
  if (a.empty()) throw DomainError("HE anchor table is empty");
  if (flops < 0) throw DomainError("negative FLOP count");
  if (flops == 0) return {0.0, true};
  auto same = [](double x, double y) { return std::abs(x - y) <= 1e-9 * std::max(x, y); };
  for (const auto& p : a)
    if (same(p.flops, flops)) return {p.seconds, false};
  if (flops < a.front().flops) return {flops * a.front().seconds / a.front().flops, true};
  if (flops > a.back().flops) return {flops * a.back().seconds / a.back().flops, true};
  const auto hi = std::upper_bound(a.begin(), a.end(), flops, [](double f, const HeAnchor& p) { return f < p.flops; });
  const auto lo = hi - 1;
  const double t = (std::log(flops) - std::log(lo->flops)) / (std::log(hi->flops) - std::log(lo->flops));
  if (calib.interpolation == Interpolation::Nearest) return {t < 0.5 ? lo->seconds : hi->seconds, false};
  return {std::exp(std::log(lo->seconds) + t * (std::log(hi->seconds) - std::log(lo->seconds))), false};
}

inline CostEstimate estimate(double relus, double flops, const CostCalibration& calib) {
  CostEstimate e;
  e.gc_seconds = gc_latency(relus, calib);
  const auto he = he_latency(flops, calib);
  e.he_seconds = he.seconds;
  e.he_extrapolated = he.extrapolated;
  e.total_seconds = e.gc_seconds + e.he_seconds;
  e.storage_bytes = storage(relus, calib);
  return e;
}

// HE time uses FLOPs without the grouped-convolution savings of ReLU reuse.
inline CostEstimate estimate(const NetworkSpec& spec, const CostCalibration& calib) {
  const auto relus = static_cast<double>(profile(spec).total_relus);
  const auto flops = static_cast<double>(profile(spec, ReuseFlops::Ignore).total_flops);
  return estimate(relus, flops, calib);
}

// ---------------------------------------------------------------------------
// Calibration files: <dir>/gc.csv and <dir>/he_<dataset>.csv

inline std::string normalize_dataset(std::string name) {
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
  if (name == "cifar") return "cifar100";
  if (name == "tiny") return "tinyimagenet";
  return name;
}

inline std::vector<HeAnchor> he_anchors_from_csv(const CsvTable& t) {
  std::vector<HeAnchor> out;
  for (const auto& row : t.rows)
    out.push_back({row.number("flops_m") * 1e6, row.number("seconds"), row.has("label") ? row.text("label") : ""});
  return out;
}

inline CostCalibration load_calibration(const std::string& dir, const std::string& dataset) {
  namespace fs = std::filesystem;
  const fs::path gc = fs::path(dir) / "gc.csv";
  const fs::path he = fs::path(dir) / ("he_" + normalize_dataset(dataset) + ".csv");
  for (const auto& p : {gc, he})
    if (!fs::exists(p)) throw IoError("calibration file not found: " + p.string());
  CostCalibration c;
  const auto g = load_csv(gc.string(), {"seconds_per_kilorelu", "storage_kib_per_relu"});
  if (g.rows.size() != 1) throw ParseError(gc.string() + ": expected exactly one data row");
  c.gc_seconds_per_kilorelu = g.rows[0].number("seconds_per_kilorelu");
  c.gc_storage_per_relu = g.rows[0].number("storage_kib_per_relu") * 1024.0;
  c.he_anchors = he_anchors_from_csv(load_csv(he.string(), {"flops_m", "seconds"}));
  c.normalize();
  return c;
}

}  // namespace forge

#pragma once

// Exact per-stage ReLU, MAC and parameter counts.
//
// One multiply-accumulate counts as one FLOP. BN, additions and pooling are
// free. Stage k's body is its blocks; the stem conv and its ReLU are reported
// separately and also folded into Stage1's ReLU count, the FC head only into
// the totals.

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "forge/error.hpp"
#include "forge/network_ir.hpp"

namespace forge {

struct StageProfile {
  std::vector<std::int64_t> relus;  // Stage1 includes the stem ReLU
  std::vector<std::int64_t> flops;  // block bodies only
  std::vector<std::int64_t> params;
  std::vector<double> relu_fraction;
  std::int64_t stem_relus = 0;
  std::int64_t stem_flops = 0;
  std::int64_t stem_params = 0;
  std::int64_t head_flops = 0;
  std::int64_t head_params = 0;
  std::int64_t total_relus = 0;
  std::int64_t total_flops = 0;
  std::int64_t total_params = 0;

  // Stage ReLUs without the stem.
  std::int64_t body_relus(std::size_t stage) const { return relus.at(stage) - (stage == 0 ? stem_relus : 0); }
};

enum class ReuseFlops { Partitioned, Ignore };

namespace detail {

struct ConvCost {
  std::int64_t macs = 0;
  std::int64_t params = 0;
};

// MACs of an f x f conv producing c_out channels at d_out^2 pixels whose
// output feeds `site`. Under ReLU reuse the activated and conv-only output
// slices are computed from the matching input slice (or the whole input
// when it cannot be split the same way), the reuse slice is copied, and a
// 1x1 conv mixes the result.
inline ConvCost conv_cost(int f, std::int64_t c_in, std::int64_t c_out, std::int64_t pixels, const ReluSite& site,
                          ReuseFlops mode) {
  const std::int64_t k = static_cast<std::int64_t>(f) * f;
  if (mode == ReuseFlops::Ignore || !site.active || site.reuse_n <= 1)
    return {k * c_in * c_out * pixels, k * c_in * c_out};
  const auto out = reuse_partition(static_cast<int>(c_out), site.reuse_n);
  std::int64_t a_in = c_in, r_in = c_in;
  if (c_in % reuse_divisor(site.reuse_n) == 0) {
    const auto in = reuse_partition(static_cast<int>(c_in), site.reuse_n);
    a_in = in.activated;
    r_in = in.conv_only;
  }
  const std::int64_t per_pixel = k * (a_in * out.activated + r_in * out.conv_only) + c_in * c_out;
  return {per_pixel * pixels, per_pixel};
}

inline std::int64_t site_relus(const NetworkSpec& spec, std::size_t stage, const ReluSite& site) {
  if (!site.active) return 0;
  const std::int64_t pixels = static_cast<std::int64_t>(stage_height(spec, stage)) * stage_width(spec, stage);
  return site_channels(spec, stage, site.site) * pixels / site.reuse_n;
}

}  // namespace detail

inline StageProfile profile(const NetworkSpec& spec, ReuseFlops mode = ReuseFlops::Partitioned) {
  validate(spec);
  StageProfile p;
  const std::size_t d = spec.depth();
  p.relus.assign(d, 0);
  p.flops.assign(d, 0);
  p.params.assign(d, 0);
  const int f = spec.kernel_size;

  for (std::size_t k = 0; k < d; ++k) {
    const auto& st = spec.stages[k];
    for (const auto& site : st.relu_layout) {
      const std::int64_t r = detail::site_relus(spec, k, site);
      p.relus[k] += r;
      if (is_stem_site(k, site.site)) p.stem_relus = r;
    }
  }

  const std::int64_t in_pixels = static_cast<std::int64_t>(spec.input.height) * spec.input.width;
  const auto stem = detail::conv_cost(f, spec.input.channels, spec.base_channels, in_pixels,
                                      spec.stages[0].relu_layout[0], mode);
  p.stem_flops = stem.macs;
  p.stem_params = stem.params;

  std::int64_t c_prev = spec.base_channels;
  for (std::size_t k = 0; k < d; ++k) {
    const auto& st = spec.stages[k];
    const std::int64_t c = st.channels;
    const std::int64_t pixels = static_cast<std::int64_t>(stage_height(spec, k)) * stage_width(spec, k);
    const int offset = stem_sites(k);
    for (int b = 0; b < st.blocks; ++b) {
      const std::int64_t c_in = b == 0 ? c_prev : c;
      const auto& s1 = st.relu_layout[static_cast<std::size_t>(offset + 2 * b)];
      const auto& s2 = st.relu_layout[static_cast<std::size_t>(offset + 2 * b + 1)];
      const auto conv1 = detail::conv_cost(f, c_in, c, pixels, s1, mode);
      const auto conv2 = detail::conv_cost(f, c, c, pixels, s2, mode);
      p.flops[k] += conv1.macs + conv2.macs;
      p.params[k] += conv1.params + conv2.params;
      const bool downsample = b == 0 && k > 0;
      if (downsample || c_in != c) {
        p.flops[k] += c_in * c * pixels;
        p.params[k] += c_in * c;
      }
    }
    if (st.blocks > 0) c_prev = c;
  }
  p.head_flops = c_prev * spec.num_classes;
  p.head_params = c_prev * spec.num_classes;

  p.total_relus = std::accumulate(p.relus.begin(), p.relus.end(), std::int64_t{0});
  p.total_flops = std::accumulate(p.flops.begin(), p.flops.end(), p.stem_flops + p.head_flops);
  p.total_params = std::accumulate(p.params.begin(), p.params.end(), p.stem_params + p.head_params);
  p.relu_fraction.assign(d, 0.0);
  if (p.total_relus > 0)
    for (std::size_t k = 0; k < d; ++k)
      p.relu_fraction[k] = static_cast<double>(p.relus[k]) / static_cast<double>(p.total_relus);
  return p;
}

struct StageCounts {
  std::vector<std::int64_t> per_stage;
  std::int64_t total = 0;
};

inline StageCounts stage_relus(const NetworkSpec& spec) {
  auto p = profile(spec);
  return {std::move(p.relus), p.total_relus};
}

// Per-stage body MACs; the total adds stem and head.
inline StageCounts stage_flops(const NetworkSpec& spec, ReuseFlops mode = ReuseFlops::Partitioned) {
  auto p = profile(spec, mode);
  return {std::move(p.flops), p.total_flops};
}

inline StageCounts stage_params(const NetworkSpec& spec) {
  auto p = profile(spec);
  return {std::move(p.params), p.total_params};
}

inline std::vector<double> relu_distribution(const NetworkSpec& spec) { return profile(spec).relu_fraction; }

struct ComplexityRatio {
  double params_per_relu = 0;
  double flops_per_relu = 0;
};

// Complexity per unit of nonlinearity of a block-body conv in each stage:
// c_k f^2 MACs and c_k f^2 / d_k^2 weights per ReLU, d_k being the stage's
// feature-map side.
inline std::vector<ComplexityRatio> complexity_ratios(const NetworkSpec& spec) {
  validate(spec);
  if (spec.depth() != 4)
    throw DomainError("complexity ratios are defined for 4-stage networks, got " + std::to_string(spec.depth()));
  std::vector<ComplexityRatio> out;
  const double f2 = static_cast<double>(spec.kernel_size) * spec.kernel_size;
  for (std::size_t k = 0; k < 4; ++k) {
    const double c = spec.stages[k].channels;
    const double area = static_cast<double>(stage_height(spec, k)) * stage_width(spec, k);
    out.push_back({c * f2 / area, c * f2});
  }
  return out;
}

struct NormalizedProfile {
  std::array<double, 4> flops{};
  std::array<double, 4> relus{};
};

// Stage FLOP and ReLU trends for multipliers (alpha, beta, gamma) at equal
// block counts, scaled so Stage1 = 64.
inline NormalizedProfile normalized_profile(double alpha, double beta, double gamma) {
  if (alpha < 1 || beta < 1 || gamma < 1) throw DomainError("multipliers must be >= 1");
  NormalizedProfile p;
  const std::array<double, 4> width{1.0, alpha, alpha * beta, alpha * beta * gamma};
  for (std::size_t k = 0; k < 4; ++k) {
    const double area = std::pow(4.0, static_cast<double>(k));
    p.relus[k] = 64.0 * width[k] / area;
    p.flops[k] = 64.0 * width[k] * width[k] / area;
  }
  return p;
}

}  // namespace forge

#pragma once

// Stage-based description of stem / stages / head residual networks.
//
// A network is a stem conv (input channels -> m) followed by D stages of
// identical basic blocks (two f x f convs, each followed by a ReLU site) and a
// global-average-pool + FC head. Stage k (0-based) runs at input / 2^k spatial
// resolution; the first block of every stage but the first downsamples and,
// like any block whose channel count changes, carries a 1x1 projection on the
// shortcut. The stem ReLU is site 0 of the first stage's layout.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "forge/error.hpp"

namespace forge {

struct InputShape {
  int height = 32;
  int width = 32;
  int channels = 3;

  friend bool operator==(const InputShape&, const InputShape&) = default;
};

// One ReLU position. reuse_n == 1 is a full ReLU; reuse_n == N applies ReLUs
// to a 1/N channel slice (see ReusePartition).
struct ReluSite {
  int site = 0;
  bool active = true;
  int reuse_n = 1;

  friend bool operator==(const ReluSite&, const ReluSite&) = default;
};

struct StageSpec {
  int blocks = 0;
  int channels = 0;
  std::vector<ReluSite> relu_layout;

  friend bool operator==(const StageSpec&, const StageSpec&) = default;
};

struct NetworkSpec {
  std::string name;
  InputShape input;
  int num_classes = 100;
  int base_channels = 16;  // stem output channels (m)
  int kernel_size = 3;     // f
  // Shortcut connections between reuse feature-subspaces. Structural only;
  // no effect on any count.
  bool reuse_shortcuts = false;
  std::vector<StageSpec> stages;

  std::size_t depth() const { return stages.size(); }

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// ---------------------------------------------------------------------------
// Layout helpers

inline bool is_stem_site(std::size_t stage, int site) { return stage == 0 && site == 0; }

inline int stem_sites(std::size_t stage) { return stage == 0 ? 1 : 0; }

inline std::vector<ReluSite> default_layout(std::size_t stage, int blocks) {
  std::vector<ReluSite> layout;
  const int n = 2 * blocks + stem_sites(stage);
  layout.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) layout.push_back({i, true, 1});
  return layout;
}

// Position of a non-stem site inside its block: 0 after the first conv,
// 1 after the second (post-addition) conv.
inline int site_position_in_block(std::size_t stage, int site) { return (site - stem_sites(stage)) % 2; }
inline int site_block(std::size_t stage, int site) { return (site - stem_sites(stage)) / 2; }

inline int site_channels(const NetworkSpec& spec, std::size_t stage, int site) {
  return is_stem_site(stage, site) ? spec.base_channels : spec.stages.at(stage).channels;
}

inline int stage_height(const NetworkSpec& spec, std::size_t stage) { return spec.input.height >> stage; }
inline int stage_width(const NetworkSpec& spec, std::size_t stage) { return spec.input.width >> stage; }

inline std::size_t relu_site_count(const NetworkSpec& spec) {
  std::size_t n = 0;
  for (const auto& s : spec.stages) n += s.relu_layout.size();
  return n;
}

inline bool has_reuse(const NetworkSpec& spec) {
  for (const auto& st : spec.stages)
    for (const auto& site : st.relu_layout)
      if (site.active && site.reuse_n > 1) return true;
  return false;
}

// Channel split of one ReLU-reuse layer. For the three-partition scheme
// (N in {4, 8, 16}) a quarter of the channels is an identity copy, c/N is
// convolved and activated, and the rest is convolved only. N == 2 is the
// naive two-group split: half activated, half convolution-only.
struct ReusePartition {
  int reuse = 0;
  int activated = 0;
  int conv_only = 0;
};

inline int reuse_divisor(int n) { return n == 2 ? 2 : std::lcm(4, n); }

inline bool supported_reuse_factor(int n) { return n == 1 || n == 2 || n == 4 || n == 8 || n == 16; }

inline ReusePartition reuse_partition(int channels, int n) {
  if (n == 1) return {0, channels, 0};
  if (!supported_reuse_factor(n)) throw DomainError("unsupported ReLU-reuse factor " + std::to_string(n));
  if (channels % reuse_divisor(n) != 0)
    throw DomainError("channel count " + std::to_string(channels) + " not divisible by " +
                      std::to_string(reuse_divisor(n)) + " for ReLU-reuse N=" + std::to_string(n));
  if (n == 2) return {0, channels / 2, channels / 2};
  const int reuse = channels / 4;
  const int activated = channels / n;
  return {reuse, activated, channels - reuse - activated};
}

// ---------------------------------------------------------------------------
// Validation

inline void validate(const NetworkSpec& spec) {
  if (spec.stages.empty()) throw DomainError("network '" + spec.name + "' has no stages");
  if (spec.input.height < 1 || spec.input.width < 1 || spec.input.channels < 1)
    throw DomainError("input dimensions must be positive");
  if (spec.num_classes < 1) throw DomainError("num_classes must be positive");
  if (spec.base_channels < 1) throw DomainError("base channels must be positive");
  if (spec.kernel_size < 1) throw DomainError("kernel size must be positive");
  const std::size_t d = spec.stages.size();
  if (d > 16) throw DomainError("too many stages");
  const int div = 1 << (d - 1);
  if (spec.input.height % div != 0 || spec.input.width % div != 0)
    throw DomainError("input " + std::to_string(spec.input.height) + "x" + std::to_string(spec.input.width) +
                      " cannot be halved " + std::to_string(d - 1) + " times");
  for (std::size_t k = 0; k < d; ++k) {
    const auto& st = spec.stages[k];
    const std::string where = "stage " + std::to_string(k + 1);
    if (st.blocks < 0) throw DomainError(where + ": negative block count");
    if (st.channels < 1) throw DomainError(where + ": channel count must be positive");
    const std::size_t expected = static_cast<std::size_t>(2 * st.blocks + stem_sites(k));
    if (st.relu_layout.size() != expected)
      throw DomainError(where + ": relu_layout has " + std::to_string(st.relu_layout.size()) + " sites, expected " +
                        std::to_string(expected));
    for (std::size_t i = 0; i < st.relu_layout.size(); ++i) {
      const auto& site = st.relu_layout[i];
      if (site.site != static_cast<int>(i))
        throw DomainError(where + ": relu_layout site " + std::to_string(i) + " has index " + std::to_string(site.site));
      if (!supported_reuse_factor(site.reuse_n))
        throw DomainError(where + ": unsupported reuse_n " + std::to_string(site.reuse_n));
      if (site.active && site.reuse_n > 1) (void)reuse_partition(site_channels(spec, k, site.site), site.reuse_n);
    }
  }
}

// ---------------------------------------------------------------------------
// Construction

// Generic constructor from explicit stage block counts and channels.
inline NetworkSpec build_network(std::string name, InputShape input, int num_classes, int base_channels,
                                 const std::vector<int>& blocks, const std::vector<int>& channels,
                                 int kernel_size = 3) {
  if (blocks.size() != channels.size())
    throw DomainError("blocks and channels lists differ in length");
  NetworkSpec spec;
  spec.name = std::move(name);
  spec.input = input;
  spec.num_classes = num_classes;
  spec.base_channels = base_channels;
  spec.kernel_size = kernel_size;
  for (std::size_t k = 0; k < blocks.size(); ++k)
    spec.stages.push_back({blocks[k], channels[k], default_layout(k, blocks[k])});
  validate(spec);
  return spec;
}

enum class ScalingKind { Uniform, Homogeneous, Heterogeneous };

// Stagewise channel multiplication factors (alpha, beta, gamma, ...).
class ScalingMethod {
 public:
  // alpha = beta = gamma = 2, stages additionally widened by `width` (WRN k).
  static ScalingMethod uniform(int width = 1) {
    if (width < 1) throw DomainError("width multiplier must be >= 1");
    return ScalingMethod(ScalingKind::Uniform, {}, width, 2);
  }
  static ScalingMethod homogeneous(int s) {
    if (s < 1) throw DomainError("scaling factor must be >= 1");
    return ScalingMethod(ScalingKind::Homogeneous, {}, 1, s);
  }
  // Non-identical factors; all-equal factors are rejected.
  static ScalingMethod heterogeneous(std::vector<int> factors) {
    check_factors(factors);
    if (std::adjacent_find(factors.begin(), factors.end(), std::not_equal_to<>()) == factors.end())
      throw DomainError("heterogeneous scaling needs non-identical factors");
    return ScalingMethod(ScalingKind::Heterogeneous, std::move(factors), 1, 0);
  }
  // Classifies an explicit factor list: all 2 -> Uniform, all equal ->
  // Homogeneous, otherwise Heterogeneous.
  static ScalingMethod stagewise(std::vector<int> factors) {
    check_factors(factors);
    const bool equal = std::adjacent_find(factors.begin(), factors.end(), std::not_equal_to<>()) == factors.end();
    if (equal && factors.front() == 2) return uniform();
    if (equal) return homogeneous(factors.front());
    return heterogeneous(std::move(factors));
  }

  ScalingKind kind() const { return kind_; }
  int width() const { return width_; }

  // Multipliers between consecutive stages for a network with `transitions` =
  // D - 1 stage boundaries.
  std::vector<int> multipliers(std::size_t transitions) const {
    if (kind_ != ScalingKind::Heterogeneous) return std::vector<int>(transitions, fill_);
    if (factors_.size() != transitions)
      throw DomainError("expected " + std::to_string(transitions) + " stagewise factors, got " +
                        std::to_string(factors_.size()));
    return factors_;
  }

 private:
  ScalingMethod(ScalingKind k, std::vector<int> f, int w, int fill)
      : kind_(k), factors_(std::move(f)), width_(w), fill_(fill) {}

  static void check_factors(const std::vector<int>& f) {
    if (f.empty()) throw DomainError("empty scaling factor list");
    for (int x : f)
      if (x < 1) throw DomainError("scaling factors must be >= 1");
  }

  ScalingKind kind_;
  std::vector<int> factors_;
  int width_ = 1;
  int fill_ = 2;
};

enum class FamilyKind { ResNet18, ResNet34, CifarResNet, WideResNet };

struct Family {
  FamilyKind kind = FamilyKind::ResNet18;
  int depth = 18;
  int widen = 1;  // WRN k

  static Family resnet18() { return {FamilyKind::ResNet18, 18, 1}; }
  static Family resnet34() { return {FamilyKind::ResNet34, 34, 1}; }
  // ResNet20/32/56...: three stages of n blocks, depth = 6n + 2.
  static Family cifar_resnet(int depth) { return {FamilyKind::CifarResNet, depth, 1}; }
  static Family wrn(int depth, int k) { return {FamilyKind::WideResNet, depth, k}; }

  std::vector<int> blocks() const {
    switch (kind) {
      case FamilyKind::ResNet18: return {2, 2, 2, 2};
      case FamilyKind::ResNet34: return {3, 4, 6, 3};
      case FamilyKind::CifarResNet:
        if (depth < 8 || (depth - 2) % 6 != 0)
          throw DomainError("ResNet depth " + std::to_string(depth) + " is not of the form 6n+2");
        return std::vector<int>(3, (depth - 2) / 6);
      case FamilyKind::WideResNet:
        if (depth < 10 || (depth - 4) % 6 != 0)
          throw DomainError("WideResNet depth " + std::to_string(depth) + " is not of the form 6n+4");
        if (widen < 1) throw DomainError("WideResNet widening factor must be >= 1");
        return std::vector<int>(3, (depth - 4) / 6);
    }
    return {};
  }

  std::string name() const {
    switch (kind) {
      case FamilyKind::ResNet18: return "ResNet18";
      case FamilyKind::ResNet34: return "ResNet34";
      case FamilyKind::CifarResNet: return "ResNet" + std::to_string(depth);
      case FamilyKind::WideResNet: return "WRN" + std::to_string(depth) + "x" + std::to_string(widen);
    }
    return {};
  }

  // "resnet18", "resnet34", "resnet20", "wrn22x8", "wrn-22-8".
  static Family parse(std::string text) {
    std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
    std::erase(text, '_');
    auto to_int = [&](const std::string& s) {
      if (s.empty() || !std::all_of(s.begin(), s.end(), ::isdigit)) throw DomainError("unknown family '" + text + "'");
      return std::stoi(s);
    };
    if (text.rfind("resnet", 0) == 0) {
      const int d = to_int(text.substr(6));
      if (d == 18) return resnet18();
      if (d == 34) return resnet34();
      return cifar_resnet(d);
    }
    if (text.rfind("wrn", 0) == 0) {
      std::string rest = text.substr(3);
      std::replace(rest.begin(), rest.end(), '-', 'x');
      if (!rest.empty() && rest.front() == 'x') rest.erase(0, 1);
      const auto x = rest.find('x');
      if (x == std::string::npos) throw DomainError("WideResNet family needs depth and width, e.g. wrn22x8");
      return wrn(to_int(rest.substr(0, x)), to_int(rest.substr(x + 1)));
    }
    throw DomainError("unknown family '" + text + "'");
  }
};

inline std::string hrn_name(const std::vector<int>& multipliers) {
  std::string s = "HRN-";
  for (int m : multipliers) s += std::to_string(m) + "x";
  return s;
}

inline std::vector<int> channels_from_multipliers(int first, const std::vector<int>& multipliers) {
  std::vector<int> ch{first};
  for (int m : multipliers) ch.push_back(ch.back() * m);
  return ch;
}

// Stage channels are [m, a m, a b m, a b g m] (times the uniform width k).
// WideResNets keep their stem at m and widen every stage by k.
inline NetworkSpec build_family(const Family& family, int m, const ScalingMethod& scaling, InputShape input,
                                int num_classes) {
  if (m < 1) throw DomainError("base channels must be >= 1");
  const auto blocks = family.blocks();
  const auto mult = scaling.multipliers(blocks.size() - 1);
  const int widen = family.widen * scaling.width();
  const auto channels = channels_from_multipliers(m * widen, mult);

  std::string name;
  switch (scaling.kind()) {
    case ScalingKind::Uniform:
      name = family.name();
      if (family.kind != FamilyKind::WideResNet && scaling.width() > 1) name += "x" + std::to_string(scaling.width());
      name += "(m=" + std::to_string(m) + ")";
      break;
    case ScalingKind::Homogeneous: {
      std::string tag;
      for (int x : mult) tag += std::to_string(x) + "x";
      name = family.name() + "(m=" + std::to_string(m) + ")-" + tag;
      break;
    }
    case ScalingKind::Heterogeneous:
      name = hrn_name(mult) + "(m=" + std::to_string(m) + ")";
      if (family.kind != FamilyKind::ResNet18) name += "-" + family.name();
      break;
  }
  return build_network(std::move(name), input, num_classes, m, blocks, channels);
}

// Stagewise multipliers c_{k+1} / c_k when all are integral.
inline std::optional<std::vector<int>> stage_multipliers(const NetworkSpec& spec) {
  std::vector<int> out;
  for (std::size_t k = 1; k < spec.stages.size(); ++k) {
    const int prev = spec.stages[k - 1].channels;
    const int cur = spec.stages[k].channels;
    if (cur % prev != 0) return std::nullopt;
    out.push_back(cur / prev);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Datasets

struct Dataset {
  InputShape input;
  int num_classes;
};

inline Dataset dataset_by_name(std::string name) {
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
  std::erase(name, '-');
  if (name == "cifar" || name == "cifar100") return {{32, 32, 3}, 100};
  if (name == "cifar10") return {{32, 32, 3}, 10};
  if (name == "tinyimagenet" || name == "tiny") return {{64, 64, 3}, 200};
  // HxWxC
  int h = 0, w = 0, c = 0;
  if (std::sscanf(name.c_str(), "%dx%dx%d", &h, &w, &c) == 3 && h > 0 && w > 0 && c > 0) return {{h, w, c}, 100};
  throw DomainError("unknown input '" + name + "' (expected cifar, cifar10, tinyimagenet or HxWxC)");
}

}  // namespace forge

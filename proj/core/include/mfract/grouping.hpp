#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "mfract/density.hpp"
#include "mfract/grid.hpp"
#include "mfract/image.hpp"

namespace mfract::grouping {

// K anchors with centers b_k and sharpness a_k > 0.
struct AnchorSet {
  std::vector<double> centers;
  std::vector<double> sharpness;
  bool degenerate = false;  // all centers coincide (flat density map)

  std::size_t size() const noexcept { return centers.size(); }
  void validate() const;
};

// K maps with per-pixel values summing to one.
using MembershipStack = FeatureStack;

// Centers at the (k - 0.5) / K quantiles of the map values, sharpness 1.
AnchorSet init_anchors(const RealGrid& d, std::size_t count);

// Softmax over -a_k (D - b_k)^2, with the per-pixel maximum logit removed
// before exponentiation.
MembershipStack soft_assign(const RealGrid& d, const AnchorSet& anchors);

// One-hot corridor membership for edges C_1 < ... < C_{K+1}: pixel joins
// corridor k when C_k <= D < C_{k+1}; the last corridor is closed on the
// right. Throws when a value lies outside [C_1, C_{K+1}].
MembershipStack hard_assign(const RealGrid& d, const std::vector<double>& edges);

struct GroupProcessorConfig {
  // Four channel-group sizes; empty means equal quarters.
  std::vector<std::size_t> split;
  std::vector<std::size_t> scales{2, 4, 8};  // pooling factors for groups 2..4
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kDepthwiseKernel = 3;
inline constexpr std::size_t kAggregateChannels = 3;

// Per-channel standardization (x - mean) / sqrt(var + 1e-5).
FeatureStack instance_normalize(const FeatureStack& features);

// Concatenation feeding the 1x1 mixing layer: group 1 of the normalized
// input untouched, groups 2..4 max-pooled by their scale, depthwise 3x3
// convolved and nearest-upsampled back to full resolution.
FeatureStack multiscale_features(const FeatureStack& features, const GroupProcessorConfig& cfg);

// GELU(1x1 conv(multiscale_features)) used as an elementwise gate on the
// input. Output has the input's shape.
FeatureStack group_process(const FeatureStack& features, const GroupProcessorConfig& cfg);

// Single 3x3 convolution (reflect padding, no bias) to `out_channels` maps.
FeatureStack aggregate(const FeatureStack& features, std::uint64_t seed,
                       std::size_t out_channels = kAggregateChannels);

struct MfbConfig {
  std::size_t anchors = 64;
  double sharpness = 1.0;
  std::size_t out_channels = kAggregateChannels;
  density::DensityFitConfig density;
  GroupProcessorConfig group;
};

struct MfbResult {
  density::DensityMap density;
  AnchorSet anchors;
  MembershipStack membership;
  FeatureStack grouped;
  FeatureStack output;
};

inline constexpr std::size_t kMinMfbSide = 32;

// density -> soft assignment over quantile anchors -> group_process ->
// aggregate.
MfbResult mfb_forward(const GrayImage& img, const MfbConfig& cfg = {});

// {"b": [...], "a": [...]}
void write_anchors_json(const std::filesystem::path& path, const AnchorSet& anchors);

}  // namespace mfract::grouping

#include "mfract/grouping.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "mfract/parallel.hpp"
#include "mfract/random.hpp"

namespace mfract::grouping {
namespace {

constexpr double kNormEps = 1e-5;
constexpr std::uint64_t kAggregateStream = 0x9E3779B97F4A7C15ULL;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * (0.5 * std::numbers::sqrt2))); }

std::size_t reflect(long i, std::size_t n) {
  const long last = static_cast<long>(n) - 1;
  if (last == 0) return 0;
  const long period = 2 * last;
  long m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m <= last ? m : period - m);
}

std::vector<double> gaussian_weights(Rng& rng, std::size_t count, std::size_t fan_in) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> w(count);
  for (double& x : w) x = rng.normal() * scale;
  return w;
}

// Ceil-mode max pooling with a square window of `factor`.
RealGrid max_pool(const RealGrid& src, std::size_t factor) {
  const std::size_t h = (src.height() + factor - 1) / factor;
  const std::size_t w = (src.width() + factor - 1) / factor;
  RealGrid out(h, w, -std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < src.height(); ++r) {
    for (std::size_t c = 0; c < src.width(); ++c) {
      double& cell = out(r / factor, c / factor);
      cell = std::max(cell, src(r, c));
    }
  }
  return out;
}

// 3x3 correlation of one plane with reflect padding.
RealGrid conv3x3(const RealGrid& src, const double* kernel) {
  RealGrid out(src.height(), src.width());
  for (std::size_t r = 0; r < src.height(); ++r) {
    for (std::size_t c = 0; c < src.width(); ++c) {
      double acc = 0.0;
      for (long dr = -1; dr <= 1; ++dr) {
        const std::size_t rr = reflect(static_cast<long>(r) + dr, src.height());
        for (long dc = -1; dc <= 1; ++dc) {
          const std::size_t cc = reflect(static_cast<long>(c) + dc, src.width());
          acc += kernel[(dr + 1) * 3 + (dc + 1)] * src(rr, cc);
        }
      }
      out(r, c) = acc;
    }
  }
  return out;
}

RealGrid upsample_nearest(const RealGrid& src, std::size_t factor, std::size_t h, std::size_t w) {
  RealGrid out(h, w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) out(r, c) = src(r / factor, c / factor);
  }
  return out;
}

std::vector<std::size_t> resolve_split(const FeatureStack& features, const GroupProcessorConfig& cfg) {
  std::vector<std::size_t> split = cfg.split;
  if (split.empty()) {
    if (features.channels() % 4 != 0) {
      throw Error("channel count " + std::to_string(features.channels()) +
                  " does not divide into four equal groups");
    }
    split.assign(4, features.channels() / 4);
  }
  if (split.size() != 4) throw Error("group split must have four parts");
  std::size_t total = 0;
  for (std::size_t s : split) total += s;
  if (total != features.channels()) throw Error("group split does not sum to the channel count");
  if (cfg.scales.size() != 3) throw Error("group processing needs three branch scales");
  for (std::size_t i = 0; i < cfg.scales.size(); ++i) {
    if (cfg.scales[i] < 1 || (i > 0 && cfg.scales[i] <= cfg.scales[i - 1])) {
      throw Error("branch scales must be positive and strictly increasing");
    }
  }
  return split;
}

struct GroupWeights {
  std::vector<std::vector<double>> depthwise;  // groups 2..4, 9 taps per channel
  std::vector<double> mix;                     // C x C, row per output channel
};

// Draw order is fixed: depthwise kernels group by group, then the mixer.
GroupWeights make_group_weights(const std::vector<std::size_t>& split, std::uint64_t seed) {
  Rng rng(seed);
  GroupWeights w;
  std::size_t channels = split[0];
  for (std::size_t part = 1; part < 4; ++part) {
    w.depthwise.push_back(gaussian_weights(rng, split[part] * kDepthwiseKernel * kDepthwiseKernel,
                                           kDepthwiseKernel * kDepthwiseKernel));
    channels += split[part];
  }
  w.mix = gaussian_weights(rng, channels * channels, channels);
  return w;
}

FeatureStack multiscale_with(const FeatureStack& features, const GroupProcessorConfig& cfg,
                             const std::vector<std::size_t>& split, const GroupWeights& weights) {
  const FeatureStack normalized = instance_normalize(features);
  std::vector<RealGrid> planes(features.channels());
  for (std::size_t c = 0; c < split[0]; ++c) planes[c] = normalized[c];
  std::size_t first = split[0];
  for (std::size_t part = 1; part < 4; ++part) {
    const std::size_t count = split[part];
    const std::size_t factor = cfg.scales[part - 1];
    const std::vector<double>& kernels = weights.depthwise[part - 1];
    parallel_rows(count, [&](std::size_t begin, std::size_t end) {
      for (std::size_t c = begin; c < end; ++c) {
        const RealGrid pooled = max_pool(normalized[first + c], factor);
        const RealGrid conv = conv3x3(pooled, kernels.data() + c * 9);
        planes[first + c] = upsample_nearest(conv, factor, features.height(), features.width());
      }
    });
    first += count;
  }
  return FeatureStack(std::move(planes));
}

}  // namespace

void AnchorSet::validate() const {
  if (centers.empty() || centers.size() != sharpness.size()) {
    throw Error("anchor set needs matching, non-empty centers and sharpness");
  }
  for (double a : sharpness) {
    if (!(a > 0.0) || !std::isfinite(a)) throw Error("anchor sharpness must be positive");
  }
  for (double b : centers) {
    if (!std::isfinite(b)) throw Error("anchor centers must be finite");
  }
}

AnchorSet init_anchors(const RealGrid& d, std::size_t count) {
  if (count == 0) throw Error("anchor count must be at least 1");
  if (d.empty()) throw Error("density map is empty");
  std::vector<double> sorted(d.values().begin(), d.values().end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  AnchorSet anchors;
  for (std::size_t k = 0; k < count; ++k) {
    const double level = (static_cast<double>(k) + 0.5) / static_cast<double>(count);
    // Piecewise-linear quantile through the points ((i + 0.5) / n, x_i).
    const double pos = std::clamp(level * n - 0.5, 0.0, n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double t = pos - static_cast<double>(lo);
    anchors.centers.push_back(sorted[lo] + t * (sorted[hi] - sorted[lo]));
    anchors.sharpness.push_back(1.0);
  }
  anchors.degenerate = sorted.front() == sorted.back();
  return anchors;
}

MembershipStack soft_assign(const RealGrid& d, const AnchorSet& anchors) {
  anchors.validate();
  const std::size_t k_count = anchors.size();
  MembershipStack out(k_count, d.height(), d.width());
  parallel_rows(d.height(), [&](std::size_t begin, std::size_t end) {
    std::vector<double> logits(k_count);
    for (std::size_t r = begin; r < end; ++r) {
      for (std::size_t c = 0; c < d.width(); ++c) {
        const double x = d(r, c);
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < k_count; ++k) {
          const double diff = x - anchors.centers[k];
          logits[k] = -anchors.sharpness[k] * diff * diff;
          top = std::max(top, logits[k]);
        }
        double total = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) {
          logits[k] = std::exp(logits[k] - top);
          total += logits[k];
        }
        for (std::size_t k = 0; k < k_count; ++k) out[k](r, c) = logits[k] / total;
      }
    }
  });
  return out;
}

MembershipStack hard_assign(const RealGrid& d, const std::vector<double>& edges) {
  if (edges.size() < 2) throw Error("corridors need at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw Error("corridor edges must be strictly increasing");
  }
  const std::size_t k_count = edges.size() - 1;
  MembershipStack out(k_count, d.height(), d.width());
  for (std::size_t r = 0; r < d.height(); ++r) {
    for (std::size_t c = 0; c < d.width(); ++c) {
      const double x = d(r, c);
      if (!(x >= edges.front() && x <= edges.back())) {
        throw Error("density value " + std::to_string(x) + " lies outside every corridor");
      }
      // First edge strictly greater than x closes the corridor holding x.
      const auto upper = std::upper_bound(edges.begin(), edges.end(), x);
      std::size_t k = static_cast<std::size_t>(upper - edges.begin());
      k = k == 0 ? 0 : k - 1;
      k = std::min(k, k_count - 1);
      out[k](r, c) = 1.0;
    }
  }
  return out;
}

FeatureStack instance_normalize(const FeatureStack& features) {
  FeatureStack out = features;
  for (auto& plane : out) {
    const double n = static_cast<double>(plane.size());
    double mean = 0.0;
    for (double v : plane.values()) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : plane.values()) var += (v - mean) * (v - mean);
    var /= n;
    const double inv = 1.0 / std::sqrt(var + kNormEps);
    for (double& v : plane.values()) v = (v - mean) * inv;
  }
  return out;
}

FeatureStack multiscale_features(const FeatureStack& features, const GroupProcessorConfig& cfg) {
  const std::vector<std::size_t> split = resolve_split(features, cfg);
  return multiscale_with(features, cfg, split, make_group_weights(split, cfg.seed));
}

FeatureStack group_process(const FeatureStack& features, const GroupProcessorConfig& cfg) {
  const std::vector<std::size_t> split = resolve_split(features, cfg);
  const GroupWeights weights = make_group_weights(split, cfg.seed);
  const FeatureStack mixed_in = multiscale_with(features, cfg, split, weights);
  const std::size_t channels = features.channels();

  FeatureStack out(channels, features.height(), features.width());
  const std::size_t pixels = features.height() * features.width();
  parallel_rows(channels, [&](std::size_t begin, std::size_t end) {
    std::vector<double> acc(pixels);
    for (std::size_t o = begin; o < end; ++o) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t i = 0; i < channels; ++i) {
        const double w = weights.mix[o * channels + i];
        const double* src = mixed_in[i].data();
        for (std::size_t p = 0; p < pixels; ++p) acc[p] += w * src[p];
      }
      const double* x = features[o].data();
      double* dst = out[o].data();
      for (std::size_t p = 0; p < pixels; ++p) dst[p] = gelu(acc[p]) * x[p];
    }
  });
  return out;
}

FeatureStack aggregate(const FeatureStack& features, std::uint64_t seed, std::size_t out_channels) {
  if (features.channels() == 0) throw Error("aggregate needs at least one input channel");
  if (out_channels == 0) throw Error("aggregate needs at least one output channel");
  const std::size_t in = features.channels();
  Rng rng(seed ^ kAggregateStream);
  const std::vector<double> weights = gaussian_weights(rng, out_channels * in * 9, in * 9);
  FeatureStack out(out_channels, features.height(), features.width());
  const std::size_t h = features.height();
  const std::size_t w = features.width();
  parallel_rows(h, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        for (std::size_t o = 0; o < out_channels; ++o) {
          double acc = 0.0;
          for (std::size_t i = 0; i < in; ++i) {
            const double* k = weights.data() + (o * in + i) * 9;
            for (long dr = -1; dr <= 1; ++dr) {
              const std::size_t rr = reflect(static_cast<long>(r) + dr, h);
              for (long dc = -1; dc <= 1; ++dc) {
                const std::size_t cc = reflect(static_cast<long>(c) + dc, w);
                acc += k[(dr + 1) * 3 + (dc + 1)] * features[i](rr, cc);
              }
            }
          }
          out[o](r, c) = acc;
        }
      }
    }
  });
  return out;
}

MfbResult mfb_forward(const GrayImage& img, const MfbConfig& cfg) {
  if (img.height() < kMinMfbSide || img.width() < kMinMfbSide) {
    throw Error("multi-fractal block needs an image of at least 32x32");
  }
  MfbResult res;
  res.density = density::density_from_image(img, cfg.density);
  res.anchors = init_anchors(res.density.d, cfg.anchors);
  std::fill(res.anchors.sharpness.begin(), res.anchors.sharpness.end(), cfg.sharpness);
  res.membership = soft_assign(res.density.d, res.anchors);
  res.grouped = group_process(res.membership, cfg.group);
  res.output = aggregate(res.grouped, cfg.group.seed, cfg.out_channels);
  return res;
}

void write_anchors_json(const std::filesystem::path& path, const AnchorSet& anchors) {
  nlohmann::ordered_json j;
  j["b"] = anchors.centers;
  j["a"] = anchors.sharpness;
  j["degenerate"] = anchors.degenerate;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace mfract::grouping

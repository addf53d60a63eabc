#pragma once

// Seeded synthetic images shared by the unit, acceptance and benchmark
// targets. Everything here is deterministic given its arguments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "mfract/image.hpp"
#include "mfract/random.hpp"
#include "mfract/spectral.hpp"

namespace mfract::fixtures {

inline GrayImage constant(std::size_t h, std::size_t w, double value) {
  return GrayImage(h, w, value);
}

inline GrayImage uniform_noise(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  GrayImage img(h, w);
  for (double& v : img.pixels().values()) v = rng.uniform();
  return img;
}

// Uniform noise rounded to multiples of 1/256, so sums of pixels are exact
// in double precision regardless of summation order.
inline GrayImage dyadic_noise(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  GrayImage img(h, w);
  for (double& v : img.pixels().values()) v = std::floor(rng.uniform() * 257.0) / 256.0;
  for (double& v : img.pixels().values()) v = std::min(v, 1.0);
  return img;
}

inline RealGrid gaussian_grid(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  RealGrid g(h, w);
  for (double& v : g.values()) v = rng.normal();
  return g;
}

// Rescales to [0, 1] by min and max.
inline GrayImage normalized(const RealGrid& g) {
  const auto [lo, hi] = std::minmax_element(g.values().begin(), g.values().end());
  RealGrid out(g.height(), g.width(), 0.5);
  if (*hi > *lo) {
    for (std::size_t i = 0; i < g.size(); ++i) out.values()[i] = (g.values()[i] - *lo) / (*hi - *lo);
  }
  return GrayImage(std::move(out));
}

// Fractional Brownian surface by spectral synthesis: amplitude f^-(hurst+1)
// with random phase. Natural-texture stand-in with surface dimension near
// 3 - hurst.
inline GrayImage fbm_texture(std::size_t n, double hurst, std::uint64_t seed) {
  Rng rng(seed);
  spectral::ComplexGrid freq(n, n);
  for (std::size_t ky = 0; ky < n; ++ky) {
    for (std::size_t kx = 0; kx < n; ++kx) {
      const double f = spectral::radial_frequency(n, n, ky, kx);
      if (f == 0.0) continue;
      const double amp = std::pow(f, -(hurst + 1.0)) * rng.normal();
      const double phase = 2.0 * std::numbers::pi * rng.uniform();
      freq(ky, kx) = std::polar(amp, phase);
    }
  }
  const spectral::ComplexGrid field = spectral::ifft2(freq);
  RealGrid real(n, n);
  for (std::size_t i = 0; i < real.size(); ++i) real.values()[i] = field.values()[i].real();
  return normalized(real);
}

// Level-`level` Sierpinski carpet on a 3^level square: 1 = kept, 0 = removed.
inline GrayImage sierpinski_carpet(int level) {
  std::size_t n = 1;
  for (int i = 0; i < level; ++i) n *= 3;
  GrayImage img(n, n, 1.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t rr = r, cc = c;
      while (rr > 0 || cc > 0) {
        if (rr % 3 == 1 && cc % 3 == 1) {
          img(r, c) = 0.0;
          break;
        }
        rr /= 3;
        cc /= 3;
      }
    }
  }
  return img;
}

// Separable binomial cascade on a 2^levels square: each dyadic split of an
// axis hands fraction p to the lower half and 1 - p to the upper half.
// Normalized so the brightest pixel is 1.
inline GrayImage binomial_cascade(int levels, double p) {
  const std::size_t n = std::size_t{1} << levels;
  std::vector<double> axis(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int l = 0; l < levels; ++l) {
      const bool upper = (i >> (levels - 1 - l)) & 1u;
      axis[i] *= upper ? (1.0 - p) : p;
    }
  }
  RealGrid g(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) g(r, c) = axis[r] * axis[c];
  }
  const double top = *std::max_element(g.values().begin(), g.values().end());
  for (double& v : g.values()) v /= top;
  return GrayImage(std::move(g));
}

// Vertical step: columns < edge get `low`, the rest `high`.
inline GrayImage step_edge(std::size_t h, std::size_t w, std::size_t edge, double low = 0.2,
                           double high = 0.8) {
  GrayImage img(h, w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) img(r, c) = c < edge ? low : high;
  }
  return img;
}

// Blocks of `cell` pixels alternating between 0 and 1.
inline GrayImage checkerboard(std::size_t h, std::size_t w, std::size_t cell) {
  GrayImage img(h, w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) img(r, c) = ((r / cell + c / cell) % 2 == 0) ? 1.0 : 0.0;
  }
  return img;
}

// Separable Gaussian blur with mirrored borders.
inline GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    total += k[i + radius];
  }
  for (double& v : k) v /= total;
  auto mirror = [](long i, long n) {
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
    return static_cast<std::size_t>(i);
  };
  const long h = static_cast<long>(img.height());
  const long w = static_cast<long>(img.width());
  RealGrid tmp(img.height(), img.width());
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * img(r, mirror(c + i, w));
      tmp(r, c) = acc;
    }
  }
  RealGrid out(img.height(), img.width());
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * tmp(mirror(r + i, h), c);
      out(r, c) = std::clamp(acc, 0.0, 1.0);
    }
  }
  return GrayImage(std::move(out));
}

}  // namespace mfract::fixtures

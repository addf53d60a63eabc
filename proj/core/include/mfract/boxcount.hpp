#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mfract/image.hpp"

namespace mfract::boxcount {

enum class Surface { binary, gray };

struct BoxCountSeries {
  Surface surface = Surface::binary;
  std::vector<std::size_t> sizes;     // box side in pixels, strictly increasing
  std::vector<std::uint64_t> counts;  // N(eps)
  std::vector<double> ln_sizes;
  std::vector<double> ln_counts;
};

struct FractalDimensionEstimate {
  double dimension = 0.0;
  double r_squared = 0.0;
  bool degenerate = false;  // all counts equal: no slope to fit
  std::vector<std::string> warnings;
  BoxCountSeries series;
};

// Box sizes used when the caller does not supply any.
inline const std::vector<std::size_t> kDefaultSizes = {2, 3, 4, 6, 8, 12, 16, 24, 32};

// Default sizes restricted to at most min(H, W) / 2.
std::vector<std::size_t> default_sizes(std::size_t height, std::size_t width);

// Binary mask with 1 where the image is >= level.
GrayImage threshold(const GrayImage& img, double level);

// Counts grid cells (origin anchored, ragged edge cells included) holding at
// least one nonzero pixel. The mask must contain only 0 and 1.
BoxCountSeries box_count_binary(const GrayImage& mask, std::vector<std::size_t> sizes);

// Differential box counting on 256 quantized gray levels. For each cell the
// intensity column spans floor(max/h) - floor(min/h) + 1 boxes of height
// h = s * 256 / min(H, W).
BoxCountSeries box_count_gray(const GrayImage& img, std::vector<std::size_t> sizes);

// OLS slope of ln N against ln(1/eps). Estimates outside [0, 2] (binary) or
// [2, 3] (gray) are kept but carry a warning.
FractalDimensionEstimate fit_dimension(const BoxCountSeries& series);

struct FdGap {
  FractalDimensionEstimate hr;
  FractalDimensionEstimate lr;
  double diff = 0.0;  // |fd_hr - fd_lr|
};

// Gray-surface dimensions of a high- and low-resolution pair. Empty size
// lists pick default_sizes() per image.
FdGap fd_gap(const GrayImage& hr, const GrayImage& lr,
             const std::vector<std::size_t>& sizes = {});

// Columns: eps, count, ln_eps, ln_count.
void write_series_csv(const std::filesystem::path& path, const BoxCountSeries& series);

}  // namespace mfract::boxcount

#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "mfract/image.hpp"

namespace mfract::density {

// Denominator of the vectorized slope. `difference` is the least-squares
// solution R*sum(a^2) - (sum a)^2; `sum` uses R*sum(a^2) + (sum a)^2 and is
// kept only so the two forms can be compared side by side.
enum class SlopeDenominator { difference, sum };

struct DensityFitConfig {
  std::vector<std::size_t> window_sizes{3, 5, 7, 9};  // odd, >= 3, increasing
  double epsilon_floor = 1e-8;                        // added before every log
  SlopeDenominator denominator = SlopeDenominator::difference;

  // Throws unless there are at least 3 strictly increasing odd sizes >= 3.
  void validate() const;
};

// Windowed intensity sums, one map per window size, reflect padded
// (mirror about the edge pixel, edge not repeated).
struct MeasureStack {
  std::vector<std::size_t> window_sizes;
  std::vector<RealGrid> maps;

  std::size_t height() const { return maps.empty() ? 0 : maps.front().height(); }
  std::size_t width() const { return maps.empty() ? 0 : maps.front().width(); }
};

// Per-pixel power-law fit log(U_l + floor) = d * log(l) + k.
struct DensityMap {
  RealGrid d;
  RealGrid k;
  RealGrid residual;  // sum of squared log residuals
};

// Sliding box sums for every configured window. Every window must be
// smaller than both image sides.
MeasureStack measure_stack(const GrayImage& img, const DensityFitConfig& cfg);

// Reference fit: per pixel, assemble and solve the 2x2 normal equations.
DensityMap density_exact(const MeasureStack& stack, const DensityFitConfig& cfg);

// Whole-image fit from the shared sums over log(l) and per-pixel running
// sums of log(U) and log(l) * log(U). Agrees with density_exact up to
// rounding when cfg.denominator is `difference`.
DensityMap density_closed_form(const MeasureStack& stack, const DensityFitConfig& cfg);

// measure_stack -> density_closed_form.
DensityMap density_from_image(const GrayImage& img, const DensityFitConfig& cfg = {});

double max_abs_difference(const RealGrid& a, const RealGrid& b);

struct MapSummary {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
};
MapSummary summarize(const RealGrid& map);

// Min-max normalized 8-bit rendering; a flat map renders mid-gray.
void write_normalized_pgm(const std::filesystem::path& path, const RealGrid& map);
// Columns: stat, value.
void write_summary_csv(const std::filesystem::path& path, const RealGrid& map);

}  // namespace mfract::density

#include "mfract/boxcount.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mfract/parallel.hpp"
#include "mfract/regression.hpp"

namespace mfract::boxcount {
namespace {

constexpr double kGrayLevels = 256.0;

std::vector<std::size_t> validated_sizes(std::vector<std::size_t> sizes,
                                         std::size_t height, std::size_t width) {
  if (sizes.size() < 3) throw Error("box counting needs at least 3 box sizes");
  std::sort(sizes.begin(), sizes.end());
  if (std::adjacent_find(sizes.begin(), sizes.end()) != sizes.end()) {
    throw Error("box sizes must be distinct");
  }
  const std::size_t limit = std::min(height, width) / 2;
  for (std::size_t s : sizes) {
    if (s < 2 || s > limit) {
      throw Error("box size " + std::to_string(s) + " outside [2, " +
                  std::to_string(limit) + "]");
    }
  }
  return sizes;
}

void fill_logs(BoxCountSeries& series) {
  series.ln_sizes.clear();
  series.ln_counts.clear();
  for (std::size_t i = 0; i < series.sizes.size(); ++i) {
    series.ln_sizes.push_back(std::log(static_cast<double>(series.sizes[i])));
    series.ln_counts.push_back(std::log(static_cast<double>(series.counts[i])));
  }
}

std::size_t cells_along(std::size_t side, std::size_t box) { return (side + box - 1) / box; }

}  // namespace

std::vector<std::size_t> default_sizes(std::size_t height, std::size_t width) {
  const std::size_t limit = std::min(height, width) / 2;
  std::vector<std::size_t> out;
  for (std::size_t s : kDefaultSizes) {
    if (s <= limit) out.push_back(s);
  }
  return out;
}

GrayImage threshold(const GrayImage& img, double level) {
  GrayImage out(img.height(), img.width());
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) out(r, c) = img(r, c) >= level ? 1.0 : 0.0;
  }
  return out;
}

BoxCountSeries box_count_binary(const GrayImage& mask, std::vector<std::size_t> sizes) {
  sizes = validated_sizes(std::move(sizes), mask.height(), mask.width());
  bool any = false;
  for (double v : mask.pixels().values()) {
    if (v != 0.0 && v != 1.0) throw Error("binary mask must contain only 0 and 1");
    any = any || v == 1.0;
  }
  if (!any) throw Error("binary mask is empty");

  BoxCountSeries series;
  series.surface = Surface::binary;
  series.sizes = sizes;
  for (std::size_t s : sizes) {
    const std::size_t rows = cells_along(mask.height(), s);
    const std::size_t cols = cells_along(mask.width(), s);
    Grid<unsigned char> occupied(rows, cols, 0);
    for (std::size_t r = 0; r < mask.height(); ++r) {
      for (std::size_t c = 0; c < mask.width(); ++c) {
        if (mask(r, c) != 0.0) occupied(r / s, c / s) = 1;
      }
    }
    series.counts.push_back(
        static_cast<std::uint64_t>(std::count(occupied.values().begin(), occupied.values().end(), 1)));
  }
  fill_logs(series);
  return series;
}

BoxCountSeries box_count_gray(const GrayImage& img, std::vector<std::size_t> sizes) {
  sizes = validated_sizes(std::move(sizes), img.height(), img.width());
  Grid<int> levels(img.height(), img.width());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    levels.values()[i] = static_cast<int>(std::lround(img.pixels().values()[i] * (kGrayLevels - 1.0)));
  }
  const double min_side = static_cast<double>(std::min(img.height(), img.width()));

  BoxCountSeries series;
  series.surface = Surface::gray;
  series.sizes = sizes;
  for (std::size_t s : sizes) {
    const double h = static_cast<double>(s) * kGrayLevels / min_side;
    const std::size_t rows = cells_along(img.height(), s);
    const std::size_t cols = cells_along(img.width(), s);
    // Per-cell column counts are integers, so the cross-band sum is exact and
    // independent of the band partition.
    std::vector<std::uint64_t> band_totals(rows, 0);
    parallel_rows(rows, [&](std::size_t begin, std::size_t end) {
      for (std::size_t cr = begin; cr < end; ++cr) {
        std::uint64_t total = 0;
        const std::size_t r0 = cr * s;
        const std::size_t r1 = std::min(img.height(), r0 + s);
        for (std::size_t cc = 0; cc < cols; ++cc) {
          const std::size_t c0 = cc * s;
          const std::size_t c1 = std::min(img.width(), c0 + s);
          int lo = levels(r0, c0);
          int hi = lo;
          for (std::size_t r = r0; r < r1; ++r) {
            for (std::size_t c = c0; c < c1; ++c) {
              lo = std::min(lo, levels(r, c));
              hi = std::max(hi, levels(r, c));
            }
          }
          const auto top = static_cast<std::uint64_t>(std::floor(hi / h));
          const auto bottom = static_cast<std::uint64_t>(std::floor(lo / h));
          total += top - bottom + 1;
        }
        band_totals[cr] = total;
      }
    });
    std::uint64_t n = 0;
    for (auto t : band_totals) n += t;
    series.counts.push_back(n);
  }
  fill_logs(series);
  return series;
}

FractalDimensionEstimate fit_dimension(const BoxCountSeries& series) {
  if (series.sizes.size() < 3 || series.sizes.size() != series.counts.size()) {
    throw Error("dimension fit needs at least 3 (size, count) pairs");
  }
  FractalDimensionEstimate est;
  est.series = series;
  // Sort by size so the estimate does not depend on the order of the input.
  std::vector<std::size_t> order(series.sizes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return series.sizes[a] < series.sizes[b]; });
  std::vector<double> x, y;
  for (std::size_t i : order) {
    if (series.counts[i] == 0 || series.sizes[i] == 0) {
      throw Error("box counts and sizes must be positive");
    }
    x.push_back(-std::log(static_cast<double>(series.sizes[i])));
    y.push_back(std::log(static_cast<double>(series.counts[i])));
  }
  const LineFit fit = fit_line(x, y);
  if (fit.degenerate) {
    est.degenerate = true;
    est.dimension = 0.0;
    est.r_squared = 0.0;
    est.warnings.push_back("all box counts are equal; dimension is undefined");
    return est;
  }
  est.dimension = fit.slope;
  est.r_squared = fit.r_squared;
  const double lo = series.surface == Surface::binary ? 0.0 : 2.0;
  const double hi = series.surface == Surface::binary ? 2.0 : 3.0;
  if (est.dimension < lo || est.dimension > hi) {
    std::ostringstream msg;
    msg << "dimension " << est.dimension << " outside expected range [" << lo << ", " << hi << "]";
    est.warnings.push_back(msg.str());
  }
  return est;
}

FdGap fd_gap(const GrayImage& hr, const GrayImage& lr, const std::vector<std::size_t>& sizes) {
  auto pick = [&](const GrayImage& img) {
    if (sizes.empty()) return default_sizes(img.height(), img.width());
    std::vector<std::size_t> usable;
    const std::size_t limit = std::min(img.height(), img.width()) / 2;
    for (std::size_t s : sizes) {
      if (s >= 2 && s <= limit) usable.push_back(s);
    }
    return usable;
  };
  FdGap gap;
  gap.hr = fit_dimension(box_count_gray(hr, pick(hr)));
  gap.lr = fit_dimension(box_count_gray(lr, pick(lr)));
  gap.diff = std::abs(gap.hr.dimension - gap.lr.dimension);
  return gap;
}

void write_series_csv(const std::filesystem::path& path, const BoxCountSeries& series) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "eps,count,ln_eps,ln_count\n" << std::setprecision(17);
  for (std::size_t i = 0; i < series.sizes.size(); ++i) {
    out << series.sizes[i] << ',' << series.counts[i] << ',' << series.ln_sizes[i] << ','
        << series.ln_counts[i] << '\n';
  }
}

}  // namespace mfract::boxcount

#include "mfract/density.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "mfract/parallel.hpp"

namespace mfract::density {
namespace {

// Mirror index into [0, n) without repeating the edge sample.
std::size_t reflect(long i, std::size_t n) {
  const long last = static_cast<long>(n) - 1;
  if (last == 0) return 0;
  const long period = 2 * last;
  long m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m <= last ? m : period - m);
}

// Box sum of width `window` along rows, then along columns.
RealGrid box_sum(const RealGrid& src, std::size_t window) {
  const long radius = static_cast<long>(window / 2);
  const std::size_t h = src.height();
  const std::size_t w = src.width();
  RealGrid horizontal(h, w);
  parallel_rows(h, [&](std::size_t begin, std::size_t end) {
    std::vector<double> padded(w + 2 * static_cast<std::size_t>(radius));
    for (std::size_t r = begin; r < end; ++r) {
      for (std::size_t i = 0; i < padded.size(); ++i) {
        padded[i] = src(r, reflect(static_cast<long>(i) - radius, w));
      }
      for (std::size_t c = 0; c < w; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < window; ++k) acc += padded[c + k];
        horizontal(r, c) = acc;
      }
    }
  });
  RealGrid out(h, w);
  parallel_rows(h, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      auto dst = out.row(r);
      for (long k = -radius; k <= radius; ++k) {
        const auto srow = horizontal.row(reflect(static_cast<long>(r) + k, h));
        for (std::size_t c = 0; c < w; ++c) dst[c] += srow[c];
      }
    }
  });
  return out;
}

void check_stack(const MeasureStack& stack, const DensityFitConfig& cfg) {
  cfg.validate();
  if (stack.maps.size() != cfg.window_sizes.size() || stack.window_sizes != cfg.window_sizes) {
    throw Error("measure stack does not match the fit configuration");
  }
  for (const auto& m : stack.maps) {
    if (!m.same_shape(stack.maps.front())) throw Error("measure maps differ in shape");
  }
}

}  // namespace

void DensityFitConfig::validate() const {
  if (window_sizes.size() < 3) throw Error("density fit needs at least 3 window sizes");
  for (std::size_t i = 0; i < window_sizes.size(); ++i) {
    const std::size_t l = window_sizes[i];
    if (l < 3 || l % 2 == 0) throw Error("window sizes must be odd and at least 3");
    if (i > 0 && l <= window_sizes[i - 1]) throw Error("window sizes must be strictly increasing");
  }
  if (!(epsilon_floor > 0.0)) throw Error("epsilon floor must be positive");
}

MeasureStack measure_stack(const GrayImage& img, const DensityFitConfig& cfg) {
  cfg.validate();
  const std::size_t largest = cfg.window_sizes.back();
  if (largest >= img.height() || largest >= img.width()) {
    throw Error("window " + std::to_string(largest) + " is not smaller than the " +
                std::to_string(img.height()) + "x" + std::to_string(img.width()) + " image");
  }
  MeasureStack stack;
  stack.window_sizes = cfg.window_sizes;
  for (std::size_t l : cfg.window_sizes) stack.maps.push_back(box_sum(img.pixels(), l));
  return stack;
}

DensityMap density_exact(const MeasureStack& stack, const DensityFitConfig& cfg) {
  check_stack(stack, cfg);
  const std::size_t h = stack.height();
  const std::size_t w = stack.width();
  const std::size_t scales = stack.maps.size();
  std::vector<double> log_l(scales);
  for (std::size_t r = 0; r < scales; ++r) log_l[r] = std::log(static_cast<double>(stack.window_sizes[r]));

  // Normal equations of min sum_r (d a_r + k - b_r)^2 share the matrix
  //   [sum a^2  sum a]
  //   [sum a    R    ]
  // across pixels; only the right-hand side [sum ab, sum b] varies.
  Eigen::Matrix2d normal;
  normal.setZero();
  for (double a : log_l) {
    normal(0, 0) += a * a;
    normal(0, 1) += a;
  }
  normal(1, 0) = normal(0, 1);
  normal(1, 1) = static_cast<double>(scales);
  const Eigen::PartialPivLU<Eigen::Matrix2d> lu(normal);

  DensityMap out{RealGrid(h, w), RealGrid(h, w), RealGrid(h, w)};
  parallel_rows(h, [&](std::size_t begin, std::size_t end) {
    std::vector<double> b(scales);
    for (std::size_t u = begin; u < end; ++u) {
      for (std::size_t v = 0; v < w; ++v) {
        Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
        for (std::size_t r = 0; r < scales; ++r) {
          b[r] = std::log(stack.maps[r](u, v) + cfg.epsilon_floor);
          rhs(0) += log_l[r] * b[r];
          rhs(1) += b[r];
        }
        const Eigen::Vector2d dk = lu.solve(rhs);
        double ss = 0.0;
        for (std::size_t r = 0; r < scales; ++r) {
          const double e = b[r] - dk(0) * log_l[r] - dk(1);
          ss += e * e;
        }
        out.d(u, v) = dk(0);
        out.k(u, v) = dk(1);
        out.residual(u, v) = ss;
      }
    }
  });
  return out;
}

DensityMap density_closed_form(const MeasureStack& stack, const DensityFitConfig& cfg) {
  check_stack(stack, cfg);
  const std::size_t h = stack.height();
  const std::size_t w = stack.width();
  const std::size_t n = h * w;
  const double scales = static_cast<double>(stack.maps.size());

  // Pixel-independent terms: a^T a and sum(a a^T) = (sum a)^2.
  double sa = 0.0, saa = 0.0;
  std::vector<double> log_l;
  for (std::size_t l : stack.window_sizes) {
    log_l.push_back(std::log(static_cast<double>(l)));
    sa += log_l.back();
    saa += log_l.back() * log_l.back();
  }
  const double denom = cfg.denominator == SlopeDenominator::difference
                           ? scales * saa - sa * sa
                           : scales * saa + sa * sa;

  // Per-pixel a^T b and sum(a b^T) = sum(a) * sum(b).
  DensityMap out{RealGrid(h, w), RealGrid(h, w), RealGrid(h, w)};
  std::vector<RealGrid> logs;
  logs.reserve(stack.maps.size());
  RealGrid sb(h, w, 0.0), sab(h, w, 0.0);
  for (std::size_t r = 0; r < stack.maps.size(); ++r) {
    RealGrid lg(h, w);
    const double* src = stack.maps[r].data();
    double* dst = lg.data();
    double* psb = sb.data();
    double* psab = sab.data();
    const double a = log_l[r];
    for (std::size_t i = 0; i < n; ++i) {
      dst[i] = std::log(src[i] + cfg.epsilon_floor);
      psb[i] += dst[i];
      psab[i] += a * dst[i];
    }
    logs.push_back(std::move(lg));
  }
  double* d = out.d.data();
  double* k = out.k.data();
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = (scales * sab.data()[i] - sa * sb.data()[i]) / denom;
    k[i] = (sb.data()[i] - d[i] * sa) / scales;
  }
  double* res = out.residual.data();
  for (std::size_t r = 0; r < logs.size(); ++r) {
    const double a = log_l[r];
    const double* lg = logs[r].data();
    for (std::size_t i = 0; i < n; ++i) {
      const double e = lg[i] - d[i] * a - k[i];
      res[i] += e * e;
    }
  }
  return out;
}

DensityMap density_from_image(const GrayImage& img, const DensityFitConfig& cfg) {
  return density_closed_form(measure_stack(img, cfg), cfg);
}

double max_abs_difference(const RealGrid& a, const RealGrid& b) {
  if (!a.same_shape(b)) throw Error("maps differ in shape");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

MapSummary summarize(const RealGrid& map) {
  if (map.empty()) throw Error("cannot summarize an empty map");
  MapSummary s;
  const auto [lo, hi] = std::minmax_element(map.values().begin(), map.values().end());
  s.min = *lo;
  s.max = *hi;
  double sum = 0.0;
  for (double v : map.values()) sum += v;
  s.mean = sum / static_cast<double>(map.size());
  double var = 0.0;
  for (double v : map.values()) var += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(var / static_cast<double>(map.size()));
  return s;
}

void write_normalized_pgm(const std::filesystem::path& path, const RealGrid& map) {
  const MapSummary s = summarize(map);
  RealGrid scaled(map.height(), map.width(), 0.5);
  if (s.max > s.min) {
    for (std::size_t i = 0; i < map.size(); ++i) {
      scaled.values()[i] = (map.values()[i] - s.min) / (s.max - s.min);
    }
  }
  encode(path, GrayImage(std::move(scaled)), 8);
}

void write_summary_csv(const std::filesystem::path& path, const RealGrid& map) {
  const MapSummary s = summarize(map);
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "stat,value\n" << std::setprecision(17) << "min," << s.min << "\nmax," << s.max
      << "\nmean," << s.mean << "\nstd," << s.stddev << '\n';
}

}  // namespace mfract::density

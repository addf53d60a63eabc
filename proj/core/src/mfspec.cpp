#include "mfract/mfspec.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "mfract/regression.hpp"

namespace mfract::mfspec {
namespace {

constexpr std::size_t kMinBoxesPerSide = 4;
constexpr double kEmbeddingSlack = 0.2;

// Least-squares slope of y against x, either free or pinned through the origin.
double scaling_slope(const std::vector<double>& x, const std::vector<double>& y, SpectrumFit fit) {
  if (fit == SpectrumFit::affine) return fit_line(x, y).slope;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
  }
  return sxy / sxx;
}

}  // namespace

MeasureGrid build_measure(const GrayImage& img, std::vector<std::size_t> box_sizes) {
  if (box_sizes.empty()) throw Error("measure needs at least one box size");
  std::sort(box_sizes.begin(), box_sizes.end());
  if (std::adjacent_find(box_sizes.begin(), box_sizes.end()) != box_sizes.end()) {
    throw Error("box sizes must be distinct");
  }
  double image_total = 0.0;
  for (double v : img.pixels().values()) image_total += v;
  if (image_total <= 0.0) throw Error("image has zero total intensity; measure undefined");

  MeasureGrid grid;
  for (std::size_t s : box_sizes) {
    if (s == 0) throw Error("box size must be positive");
    const std::size_t rows = img.height() / s;
    const std::size_t cols = img.width() / s;
    if (rows < kMinBoxesPerSide || cols < kMinBoxesPerSide) {
      throw Error("box size " + std::to_string(s) + " leaves fewer than " +
                  std::to_string(kMinBoxesPerSide) + " boxes per side");
    }
    MeasureLevel level;
    level.box_size = s;
    level.eps = static_cast<double>(s) / static_cast<double>(std::min(rows, cols) * s);
    level.mass = RealGrid(rows, cols, 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < rows * s; ++r) {
      for (std::size_t c = 0; c < cols * s; ++c) level.mass(r / s, c / s) += img(r, c);
    }
    for (double m : level.mass.values()) total += m;
    if (total <= 0.0) {
      throw Error("cropped image at box size " + std::to_string(s) + " has zero intensity");
    }
    for (double& m : level.mass.values()) m /= total;
    grid.levels.push_back(std::move(level));
  }
  return grid;
}

HolderSet holder_exponents(const MeasureGrid& grid) {
  HolderSet out;
  for (const auto& level : grid.levels) {
    if (!(level.eps > 0.0 && level.eps < 1.0)) {
      throw Error("box scale eps must lie in (0, 1); got " + std::to_string(level.eps));
    }
    const double ln_eps = std::log(level.eps);
    std::vector<double> alphas;
    for (double m : level.mass.values()) {
      if (m > 0.0) alphas.push_back(std::log(m) / ln_eps);
    }
    out.eps.push_back(level.eps);
    out.alphas.push_back(std::move(alphas));
  }
  return out;
}

QuadraticSummary fit_quadratic(const std::vector<double>& alphas,
                               const std::vector<double>& f_values) {
  if (alphas.size() != f_values.size() || alphas.size() < 3) {
    throw Error("quadratic fit needs at least 3 points");
  }
  const auto n = static_cast<Eigen::Index>(alphas.size());
  const double mean = std::accumulate(alphas.begin(), alphas.end(), 0.0) / static_cast<double>(n);
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = alphas[static_cast<std::size_t>(i)] - mean;
    design(i, 0) = x * x;
    design(i, 1) = x;
    design(i, 2) = 1.0;
    rhs(i) = f_values[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d c = design.colPivHouseholderQr().solve(rhs);
  // Undo the centering: c2 (a - m)^2 + c1 (a - m) + c0.
  QuadraticSummary q;
  q.coeffs = {c(0), c(1) - 2.0 * c(0) * mean, c(0) * mean * mean - c(1) * mean + c(2)};

  const auto [lo_it, hi_it] = std::minmax_element(alphas.begin(), alphas.end());
  const double data_range = *hi_it - *lo_it;
  const auto argmax = static_cast<std::size_t>(
      std::max_element(f_values.begin(), f_values.end()) - f_values.begin());
  if (c(0) < 0.0) {
    q.peak_alpha = mean - c(1) / (2.0 * c(0));
    const double disc = c(1) * c(1) - 4.0 * c(0) * c(2);
    q.width = disc > 0.0 ? std::sqrt(disc) / std::abs(c(0)) : data_range;
  } else {
    q.peak_alpha = alphas[argmax];
    q.width = data_range;
  }
  return q;
}

SpectrumCurve spectrum(const MeasureGrid& grid, std::size_t n_alpha_bins, SpectrumFit fit) {
  if (grid.levels.size() < 3) throw Error("spectrum needs at least 3 scales");
  if (n_alpha_bins < 8) throw Error("spectrum needs at least 8 alpha bins");
  const HolderSet holder = holder_exponents(grid);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& level : holder.alphas) {
    for (double a : level) {
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
  }
  if (!std::isfinite(lo)) throw Error("no boxes carry mass");

  std::vector<double> ln_inv_eps;
  for (double e : holder.eps) ln_inv_eps.push_back(-std::log(e));

  SpectrumCurve curve;
  if (hi - lo <= 1e-9 * std::max(1.0, std::abs(hi))) {
    // Single exponent everywhere: the support dimension is the only point.
    std::vector<double> ln_n;
    double alpha_sum = 0.0;
    std::size_t alpha_count = 0;
    for (const auto& level : holder.alphas) {
      ln_n.push_back(std::log(static_cast<double>(level.size())));
      for (double a : level) alpha_sum += a;
      alpha_count += level.size();
    }
    const double f = scaling_slope(ln_inv_eps, ln_n, fit);
    curve.monofractal = true;
    curve.alphas = {alpha_sum / static_cast<double>(alpha_count)};
    curve.f_values = {f};
    curve.quad_coeffs = {0.0, 0.0, f};
    curve.width = 0.0;
    curve.peak_alpha = curve.alphas.front();
    return curve;
  }

  const double bin_width = (hi - lo) / static_cast<double>(n_alpha_bins);
  // counts[bin][level]
  std::vector<std::vector<std::size_t>> counts(n_alpha_bins,
                                               std::vector<std::size_t>(holder.alphas.size(), 0));
  for (std::size_t l = 0; l < holder.alphas.size(); ++l) {
    for (double a : holder.alphas[l]) {
      auto bin = static_cast<std::size_t>((a - lo) / bin_width);
      bin = std::min(bin, n_alpha_bins - 1);
      ++counts[bin][l];
    }
  }
  for (std::size_t b = 0; b < n_alpha_bins; ++b) {
    std::vector<double> x, y;
    for (std::size_t l = 0; l < holder.alphas.size(); ++l) {
      if (counts[b][l] == 0) continue;
      x.push_back(ln_inv_eps[l]);
      y.push_back(std::log(static_cast<double>(counts[b][l])));
    }
    if (x.size() < kMinScalesPerBin) continue;
    curve.alphas.push_back(lo + (static_cast<double>(b) + 0.5) * bin_width);
    curve.f_values.push_back(scaling_slope(x, y, fit));
  }
  if (curve.alphas.size() < 3) throw Error("insufficient multiscale support");

  const QuadraticSummary q = fit_quadratic(curve.alphas, curve.f_values);
  curve.quad_coeffs = q.coeffs;
  curve.width = q.width;
  curve.peak_alpha = q.peak_alpha;
  if (q.coeffs[0] > 0.0) curve.warnings.push_back("fitted spectrum is not concave");
  const double f_max = *std::max_element(curve.f_values.begin(), curve.f_values.end());
  if (f_max > kEmbeddingDimension + kEmbeddingSlack) {
    std::ostringstream msg;
    msg << "f(alpha) reaches " << f_max << ", above the embedding dimension";
    curve.warnings.push_back(msg.str());
  }
  return curve;
}

SpectrumCurve spectrum_from_image(const GrayImage& img, const std::vector<std::size_t>& box_sizes,
                                  std::size_t n_alpha_bins, SpectrumFit fit) {
  return spectrum(build_measure(img, box_sizes), n_alpha_bins, fit);
}

void write_spectrum_csv(const std::filesystem::path& path, const SpectrumCurve& curve) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "alpha,f_alpha\n" << std::setprecision(17);
  for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
    out << curve.alphas[i] << ',' << curve.f_values[i] << '\n';
  }
}

void write_spectrum_json(const std::filesystem::path& path, const SpectrumCurve& curve) {
  nlohmann::ordered_json j;
  j["quad_coeffs"] = {curve.quad_coeffs[0], curve.quad_coeffs[1], curve.quad_coeffs[2]};
  j["width"] = curve.width;
  j["peak_alpha"] = curve.peak_alpha;
  j["monofractal"] = curve.monofractal;
  j["points"] = curve.alphas.size();
  j["warnings"] = curve.warnings;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace mfract::mfspec

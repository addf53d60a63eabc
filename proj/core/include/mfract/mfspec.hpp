#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "mfract/image.hpp"

namespace mfract::mfspec {

// Box measures at one scale. Boxes tile the image cropped to a multiple of
// box_size; mass is stored row-major over the box lattice.
struct MeasureLevel {
  std::size_t box_size = 0;
  double eps = 0.0;  // box_size / min side of the cropped image, always < 1
  RealGrid mass;     // sums to 1
};

struct MeasureGrid {
  std::vector<MeasureLevel> levels;  // ordered by increasing box size
};

// Coarse Hoelder exponents alpha_i = ln mu / ln eps for the nonzero boxes
// of each level, in level order.
struct HolderSet {
  std::vector<double> eps;
  std::vector<std::vector<double>> alphas;
};

struct SpectrumCurve {
  std::vector<double> alphas;    // bin centers, strictly increasing
  std::vector<double> f_values;  // f(alpha) per surviving bin
  std::array<double, 3> quad_coeffs{};  // a2, a1, a0
  double width = 0.0;
  double peak_alpha = 0.0;
  // Every box at every scale had the same exponent; the curve is a single
  // point and the summary is filled directly instead of by fit_quadratic.
  bool monofractal = false;
  std::vector<std::string> warnings;
};

struct QuadraticSummary {
  std::array<double, 3> coeffs{};  // a2, a1, a0
  double width = 0.0;
  double peak_alpha = 0.0;
};

inline const std::vector<std::size_t> kDefaultBoxSizes = {4, 8, 16, 32};
inline constexpr std::size_t kDefaultAlphaBins = 24;
inline constexpr std::size_t kMinScalesPerBin = 3;
inline constexpr double kEmbeddingDimension = 2.0;

// How f is regressed on ln(1/eps). through_origin is the least-squares ratio
// ln N / ln(1/eps); each per-scale ratio is at most 2, so f stays within the
// embedding dimension. affine adds a free intercept, which follows finite-size
// drift in bin populations and can push f well above 2.
enum class SpectrumFit { through_origin, affine };

// Normalized intensity mass per box. Each box size needs at least 4 boxes per
// side once the image is cropped to a multiple of that size.
MeasureGrid build_measure(const GrayImage& img, std::vector<std::size_t> box_sizes);

// Zero-mass boxes are skipped. Throws if any level has eps >= 1.
HolderSet holder_exponents(const MeasureGrid& grid);

// Histogram spectrum: alpha bins share edges across scales; f for a bin is
// the least-squares slope of ln N_eps(bin) against ln(1/eps), over the scales
// where the bin is occupied, kept only when at least kMinScalesPerBin scales
// qualify. The curve is returned already summarized by fit_quadratic.
SpectrumCurve spectrum(const MeasureGrid& grid, std::size_t n_alpha_bins = kDefaultAlphaBins,
                       SpectrumFit fit = SpectrumFit::through_origin);

// Least-squares quadratic through the curve points. width is the distance
// between the real roots of a concave fit, else the alpha range of the data;
// peak_alpha is the vertex of a concave fit, else the data argmax.
QuadraticSummary fit_quadratic(const std::vector<double>& alphas,
                               const std::vector<double>& f_values);

// Convenience: build_measure -> spectrum.
SpectrumCurve spectrum_from_image(const GrayImage& img,
                                  const std::vector<std::size_t>& box_sizes = kDefaultBoxSizes,
                                  std::size_t n_alpha_bins = kDefaultAlphaBins,
                                  SpectrumFit fit = SpectrumFit::through_origin);

void write_spectrum_csv(const std::filesystem::path& path, const SpectrumCurve& curve);
void write_spectrum_json(const std::filesystem::path& path, const SpectrumCurve& curve);

}  // namespace mfract::mfspec

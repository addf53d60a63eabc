#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "mfract/grid.hpp"
#include "mfract/image.hpp"

namespace mfract::spectral {

using Complex = std::complex<double>;
using ComplexGrid = Grid<Complex>;

// Largest radial frequency on the DFT grid (the corner bin), in cycles/pixel.
inline const double kMaxRadialFrequency = std::sqrt(0.5);

// Unnormalized forward DFT in the unshifted layout (DC at (0, 0)).
ComplexGrid fft2(const RealGrid& img);
ComplexGrid fft2(const ComplexGrid& img);
// Inverse DFT scaled by 1 / (H W), so ifft2(fft2(x)) == x.
ComplexGrid ifft2(const ComplexGrid& freq);

// sqrt(fx^2 + fy^2) of bin (ky, kx) with fx = kx / W, fy = ky / H folded to
// the signed range [-1/2, 1/2].
double radial_frequency(std::size_t height, std::size_t width, std::size_t ky, std::size_t kx);

class AttentionMap {
 public:
  enum class Kind { identity, lowpass, highpass, custom };

  static AttentionMap identity(std::size_t height, std::size_t width);
  // Keeps bins with radial frequency <= radius; radius 0 keeps only DC.
  static AttentionMap lowpass(std::size_t height, std::size_t width, double radius);
  // Keeps bins with radial frequency > radius.
  static AttentionMap highpass(std::size_t height, std::size_t width, double radius);
  static AttentionMap custom(ComplexGrid values);
  // Real multipliers from a single-channel PFM in the unshifted layout.
  static AttentionMap from_pfm(const std::filesystem::path& path);

  Kind kind() const noexcept { return kind_; }
  double radius() const noexcept { return radius_; }
  const ComplexGrid& values() const noexcept { return values_; }
  std::size_t height() const noexcept { return values_.height(); }
  std::size_t width() const noexcept { return values_.width(); }

  // A(k) == conj(A(-k)) for every bin, which keeps real inputs real.
  bool conjugate_symmetric(double tol = 1e-12) const;

 private:
  AttentionMap(Kind kind, double radius, ComplexGrid values)
      : kind_(kind), radius_(radius), values_(std::move(values)) {}

  Kind kind_ = Kind::identity;
  double radius_ = 0.0;
  ComplexGrid values_;
};

struct FilterResult {
  RealGrid image;              // real part of the inverse transform
  double imag_residue = 0.0;   // max |imag| that was discarded
};

// ifft2(attention * fft2(img)).
FilterResult apply_filter(const RealGrid& img, const AttentionMap& attention);

struct TensorFilterResult {
  ImageTensor image;  // not clamped
  double imag_residue = 0.0;
};
// Same attention applied to each channel.
TensorFilterResult apply_filter(const ImageTensor& img, const AttentionMap& attention);

// Radial band [lo, hi) in cycles/pixel; a band reaching kMaxRadialFrequency
// also includes its upper edge.
struct FrequencyBand {
  double lo = 0.0;
  double hi = kMaxRadialFrequency;
};

// Sum of |X|^2 over the bins inside the band. Throws on an invalid or empty
// band.
double band_energy(const ComplexGrid& spectrum, FrequencyBand band);
double band_energy(const RealGrid& img, FrequencyBand band);

double spatial_energy(const RealGrid& img);

// `count` equal-width bands covering [0, kMaxRadialFrequency].
std::vector<FrequencyBand> equal_bands(std::size_t count);

}  // namespace mfract::spectral

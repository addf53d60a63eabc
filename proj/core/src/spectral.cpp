#include "mfract/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

namespace mfract::spectral {
namespace {

// FFTW planning is not thread safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

ComplexGrid transform(const ComplexGrid& src, int sign) {
  if (src.height() < 1 || src.width() < 1) throw Error("cannot transform an empty grid");
  ComplexGrid in = src;
  ComplexGrid out(src.height(), src.width());
  auto* pin = reinterpret_cast<fftw_complex*>(in.data());
  auto* pout = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan plan = nullptr;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(src.height()), static_cast<int>(src.width()), pin,
                            pout, sign, FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw Error("FFT planning failed");
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

ComplexGrid to_complex(const RealGrid& img) {
  ComplexGrid out(img.height(), img.width());
  for (std::size_t i = 0; i < img.size(); ++i) out.values()[i] = img.values()[i];
  return out;
}

double signed_frequency(std::size_t k, std::size_t n) {
  const auto ki = static_cast<double>(k);
  const auto ni = static_cast<double>(n);
  return (2 * k <= n ? ki : ki - ni) / ni;
}

}  // namespace

ComplexGrid fft2(const RealGrid& img) { return transform(to_complex(img), FFTW_FORWARD); }

ComplexGrid fft2(const ComplexGrid& img) { return transform(img, FFTW_FORWARD); }

ComplexGrid ifft2(const ComplexGrid& freq) {
  ComplexGrid out = transform(freq, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(freq.size());
  for (auto& v : out.values()) v *= scale;
  return out;
}

double radial_frequency(std::size_t height, std::size_t width, std::size_t ky, std::size_t kx) {
  const double fy = signed_frequency(ky, height);
  const double fx = signed_frequency(kx, width);
  return std::sqrt(fx * fx + fy * fy);
}

AttentionMap AttentionMap::identity(std::size_t height, std::size_t width) {
  return AttentionMap(Kind::identity, 0.0, ComplexGrid(height, width, Complex{1.0, 0.0}));
}

AttentionMap AttentionMap::lowpass(std::size_t height, std::size_t width, double radius) {
  if (!(radius >= 0.0)) throw Error("lowpass radius must be non-negative");
  ComplexGrid v(height, width);
  for (std::size_t ky = 0; ky < height; ++ky) {
    for (std::size_t kx = 0; kx < width; ++kx) {
      v(ky, kx) = radial_frequency(height, width, ky, kx) <= radius ? 1.0 : 0.0;
    }
  }
  return AttentionMap(Kind::lowpass, radius, std::move(v));
}

AttentionMap AttentionMap::highpass(std::size_t height, std::size_t width, double radius) {
  if (!(radius >= 0.0)) throw Error("highpass radius must be non-negative");
  ComplexGrid v(height, width);
  for (std::size_t ky = 0; ky < height; ++ky) {
    for (std::size_t kx = 0; kx < width; ++kx) {
      v(ky, kx) = radial_frequency(height, width, ky, kx) > radius ? 1.0 : 0.0;
    }
  }
  return AttentionMap(Kind::highpass, radius, std::move(v));
}

AttentionMap AttentionMap::custom(ComplexGrid values) {
  for (const auto& z : values.values()) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw Error("attention map must be finite");
    }
  }
  return AttentionMap(Kind::custom, 0.0, std::move(values));
}

AttentionMap AttentionMap::from_pfm(const std::filesystem::path& path) {
  const FeatureStack planes = read_pfm(path);
  if (planes.channels() != 1) throw Error("attention PFM must have a single channel");
  ComplexGrid v(planes.height(), planes.width());
  for (std::size_t i = 0; i < v.size(); ++i) v.values()[i] = planes[0].values()[i];
  return custom(std::move(v));
}

bool AttentionMap::conjugate_symmetric(double tol) const {
  const std::size_t h = height();
  const std::size_t w = width();
  for (std::size_t ky = 0; ky < h; ++ky) {
    for (std::size_t kx = 0; kx < w; ++kx) {
      const Complex mirror = values_((h - ky) % h, (w - kx) % w);
      if (std::abs(values_(ky, kx) - std::conj(mirror)) > tol) return false;
    }
  }
  return true;
}

FilterResult apply_filter(const RealGrid& img, const AttentionMap& attention) {
  if (img.height() != attention.height() || img.width() != attention.width()) {
    throw Error("attention map is " + std::to_string(attention.height()) + "x" +
                std::to_string(attention.width()) + " but the image is " +
                std::to_string(img.height()) + "x" + std::to_string(img.width()));
  }
  ComplexGrid freq = fft2(img);
  for (std::size_t i = 0; i < freq.size(); ++i) freq.values()[i] *= attention.values().values()[i];
  const ComplexGrid back = ifft2(freq);
  FilterResult res{RealGrid(img.height(), img.width()), 0.0};
  for (std::size_t i = 0; i < back.size(); ++i) {
    res.image.values()[i] = back.values()[i].real();
    res.imag_residue = std::max(res.imag_residue, std::abs(back.values()[i].imag()));
  }
  return res;
}

TensorFilterResult apply_filter(const ImageTensor& img, const AttentionMap& attention) {
  TensorFilterResult res{ImageTensor(img.height(), img.width(), img.channels()), 0.0};
  for (std::size_t ch = 0; ch < img.channels(); ++ch) {
    const FilterResult plane = apply_filter(img.channel(ch), attention);
    res.image.set_channel(ch, plane.image);
    res.imag_residue = std::max(res.imag_residue, plane.imag_residue);
  }
  return res;
}

double band_energy(const ComplexGrid& spectrum, FrequencyBand band) {
  constexpr double kEdgeTol = 1e-12;
  if (!(band.lo >= 0.0) || !(band.hi > band.lo) || band.hi > kMaxRadialFrequency + kEdgeTol) {
    throw Error("frequency band must satisfy 0 <= lo < hi <= sqrt(1/2)");
  }
  const bool closed = band.hi >= kMaxRadialFrequency - kEdgeTol;
  const std::size_t h = spectrum.height();
  const std::size_t w = spectrum.width();
  double energy = 0.0;
  std::size_t bins = 0;
  for (std::size_t ky = 0; ky < h; ++ky) {
    for (std::size_t kx = 0; kx < w; ++kx) {
      const double f = radial_frequency(h, w, ky, kx);
      if (f < band.lo || (closed ? f > band.hi + kEdgeTol : f >= band.hi)) continue;
      energy += std::norm(spectrum(ky, kx));
      ++bins;
    }
  }
  if (bins == 0) throw Error("frequency band contains no DFT bins");
  return energy;
}

double band_energy(const RealGrid& img, FrequencyBand band) { return band_energy(fft2(img), band); }

double spatial_energy(const RealGrid& img) {
  double e = 0.0;
  for (double v : img.values()) e += v * v;
  return e;
}

std::vector<FrequencyBand> equal_bands(std::size_t count) {
  if (count == 0) throw Error("band count must be positive");
  std::vector<FrequencyBand> bands;
  for (std::size_t i = 0; i < count; ++i) {
    bands.push_back({kMaxRadialFrequency * static_cast<double>(i) / static_cast<double>(count),
                     i + 1 == count ? kMaxRadialFrequency
                                    : kMaxRadialFrequency * static_cast<double>(i + 1) /
                                          static_cast<double>(count)});
  }
  return bands;
}

}  // namespace mfract::spectral

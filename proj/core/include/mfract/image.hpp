#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <vector>

#include "mfract/grid.hpp"

namespace mfract {

// H x W x C raster, channels interleaved, values nominally in [0, 1].
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(std::size_t height, std::size_t width, std::size_t channels,
              double fill = 0.0);
  ImageTensor(std::size_t height, std::size_t width, std::size_t channels,
              std::vector<double> data);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }

  double& at(std::size_t row, std::size_t col, std::size_t ch) noexcept {
    return data_[(row * width_ + col) * channels_ + ch];
  }
  double at(std::size_t row, std::size_t col, std::size_t ch) const noexcept {
    return data_[(row * width_ + col) * channels_ + ch];
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  RealGrid channel(std::size_t ch) const;
  void set_channel(std::size_t ch, const RealGrid& plane);

  bool same_shape(const ImageTensor& o) const noexcept {
    return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
  }

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

// Single-channel luminance image with values in [0, 1].
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(std::size_t height, std::size_t width, double fill = 0.0)
      : pixels_(height, width, fill) {}
  // Throws if any value is non-finite or outside [0, 1].
  explicit GrayImage(RealGrid pixels);

  std::size_t height() const noexcept { return pixels_.height(); }
  std::size_t width() const noexcept { return pixels_.width(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return pixels_(r, c); }
  double operator()(std::size_t r, std::size_t c) const noexcept { return pixels_(r, c); }

  const RealGrid& pixels() const noexcept { return pixels_; }
  RealGrid& pixels() noexcept { return pixels_; }

  ImageTensor as_tensor() const;

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  RealGrid pixels_;
};

// Rational resampling factor num/den.
struct Scale {
  int num = 1;
  int den = 1;
  double value() const noexcept { return static_cast<double>(num) / den; }
};

inline constexpr std::size_t kMinAnalysisSide = 8;
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

// Reads PNG (8/16-bit), binary PGM (P5) or PPM (P6). Values are scaled by
// the format's maximum so that the largest code maps to 1.0.
ImageTensor decode(const std::filesystem::path& path);

// Writes PNG, PGM or PPM chosen by extension. bit_depth is 8 or 16.
void encode(const std::filesystem::path& path, const ImageTensor& img,
            int bit_depth = 8);
void encode(const std::filesystem::path& path, const GrayImage& img,
            int bit_depth = 8);

// Concatenated P5 pages, one per grid. Values are clamped to [0, 1].
void write_pgm_pages(const std::filesystem::path& path,
                     const std::vector<RealGrid>& pages);

// Portable float map: one channel writes "Pf", three write "PF".
// 32-bit little-endian, rows stored bottom to top.
void write_pfm(const std::filesystem::path& path, const RealGrid& plane);
void write_pfm(const std::filesystem::path& path, const FeatureStack& planes);
FeatureStack read_pfm(const std::filesystem::path& path);

// Rec.601 luma for three channels, identity for one.
GrayImage to_gray(const ImageTensor& img);

// Catmull-Rom (a = -0.5) resampling with clamp-to-edge borders. When
// shrinking, the kernel is stretched by 1/scale so it also low-passes.
// Output is round(side * scale) per axis, clamped to [0, 1].
ImageTensor resize_bicubic(const ImageTensor& img, Scale scale);
GrayImage resize_bicubic(const GrayImage& img, Scale scale);

// 10 log10(1 / MSE); kPsnrIdentical when the images are equal.
double psnr(const ImageTensor& a, const ImageTensor& b);
double psnr(const GrayImage& a, const GrayImage& b);

}  // namespace mfract

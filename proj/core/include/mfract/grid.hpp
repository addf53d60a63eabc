#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfract {

// Library-wide error type. Every precondition violation surfaces as one of
// these with a human-readable message.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense row-major 2D buffer.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t height, std::size_t width, T fill = T{})
      : height_(height), width_(width), data_(height * width, fill) {}
  Grid(std::size_t height, std::size_t width, std::vector<T> data)
      : height_(height), width_(width), data_(std::move(data)) {
    if (data_.size() != height_ * width_) {
      throw Error("grid data size " + std::to_string(data_.size()) +
                  " does not match " + std::to_string(height_) + "x" +
                  std::to_string(width_));
    }
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t row, std::size_t col) noexcept {
    return data_[row * width_ + col];
  }
  const T& operator()(std::size_t row, std::size_t col) const noexcept {
    return data_[row * width_ + col];
  }

  std::span<T> row(std::size_t r) noexcept {
    return {data_.data() + r * width_, width_};
  }
  std::span<const T> row(std::size_t r) const noexcept {
    return {data_.data() + r * width_, width_};
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  bool same_shape(const Grid& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<T> data_;
};

using RealGrid = Grid<double>;

// Channel-major stack of equally sized real grids (C x H x W).
class FeatureStack {
 public:
  FeatureStack() = default;
  FeatureStack(std::size_t channels, std::size_t height, std::size_t width)
      : height_(height), width_(width), channels_(channels, RealGrid(height, width)) {}
  explicit FeatureStack(std::vector<RealGrid> channels);

  std::size_t channels() const noexcept { return channels_.size(); }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }

  RealGrid& operator[](std::size_t c) noexcept { return channels_[c]; }
  const RealGrid& operator[](std::size_t c) const noexcept { return channels_[c]; }

  auto begin() noexcept { return channels_.begin(); }
  auto end() noexcept { return channels_.end(); }
  auto begin() const noexcept { return channels_.begin(); }
  auto end() const noexcept { return channels_.end(); }

  friend bool operator==(const FeatureStack&, const FeatureStack&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<RealGrid> channels_;
};

inline FeatureStack::FeatureStack(std::vector<RealGrid> channels)
    : channels_(std::move(channels)) {
  if (!channels_.empty()) {
    height_ = channels_.front().height();
    width_ = channels_.front().width();
    for (const auto& c : channels_) {
      if (!c.same_shape(channels_.front())) {
        throw Error("feature stack channels differ in shape");
      }
    }
  }
}

}  // namespace mfract

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "panmap/label.hpp"

namespace panmap {

struct Rgb8 {
  uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(Rgb8 a, Rgb8 b) {
    return a.r == b.r && a.g == b.g && a.b == b.b;
  }
};

// Dense row-major image container.
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, T fill = T())
      : width_(width), height_(height),
        data_(static_cast<size_t>(width) * height, fill) {
    if (width < 0 || height < 0)
      throw std::invalid_argument("negative image dimensions");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& at(int x, int y) { return data_[static_cast<size_t>(y) * width_ + x]; }
  const T& at(int x, int y) const {
    return data_[static_cast<size_t>(y) * width_ + x];
  }
  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }

  bool same_size(int w, int h) const { return width_ == w && height_ == h; }
  template <typename U>
  bool same_size(const Image<U>& other) const {
    return same_size(other.width(), other.height());
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  friend bool operator==(const Image& a, const Image& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
  }

 private:
  int width_ = 0, height_ = 0;
  std::vector<T> data_;
};

using PanopticImage = Image<PanopticLabel>;
using DepthImage = Image<float>;
using ColorImage = Image<Rgb8>;

}  // namespace panmap

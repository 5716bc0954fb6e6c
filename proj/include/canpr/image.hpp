#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace canpr {

/// Planar floating-point raster. Plane `c` occupies
/// data[c*width*height, (c+1)*width*height), rows stored top to bottom.
class ImageF {
 public:
  ImageF() = default;
  ImageF(int width, int height, int channels, double fill = 0.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t plane_size() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const noexcept { return data_.empty(); }

  double& at(int x, int y, int c = 0) noexcept {
    return data_[static_cast<std::size_t>(c) * plane_size() +
                 static_cast<std::size_t>(y) * width_ + x];
  }
  double at(int x, int y, int c = 0) const noexcept {
    return data_[static_cast<std::size_t>(c) * plane_size() +
                 static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<double> plane(int c) noexcept {
    return {data_.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
  }
  std::span<const double> plane(int c) const noexcept {
    return {data_.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
  }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool same_size(const ImageF& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }
  bool same_shape(const ImageF& other) const noexcept {
    return same_size(other) && channels_ == other.channels_;
  }

  /// Single-channel copy of plane `c`.
  ImageF channel(int c) const;
  void set_channel(int c, const ImageF& plane);

  bool operator==(const ImageF&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Assembles a multi-channel image from equally sized single-channel planes.
ImageF merge_channels(std::span<const ImageF> planes);

/// Clamps every sample to [0,1].
ImageF clamped(ImageF img);

/// Three-plane Lab raster on a unit scale: L = L*/100, a = (a*+128)/255,
/// b = (b*+128)/255.
class LabImage {
 public:
  LabImage() = default;
  explicit LabImage(ImageF planes);

  int width() const noexcept { return planes_.width(); }
  int height() const noexcept { return planes_.height(); }

  std::span<double> L() noexcept { return planes_.plane(0); }
  std::span<const double> L() const noexcept { return planes_.plane(0); }
  std::span<double> a() noexcept { return planes_.plane(1); }
  std::span<const double> a() const noexcept { return planes_.plane(1); }
  std::span<double> b() noexcept { return planes_.plane(2); }
  std::span<const double> b() const noexcept { return planes_.plane(2); }

  const ImageF& planes() const noexcept { return planes_; }
  ImageF& planes() noexcept { return planes_; }

 private:
  ImageF planes_;
};

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool at(int x, int y) const noexcept {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  void set(int x, int y, bool v) noexcept {
    bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0;
  }
  bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }

  std::size_t count() const noexcept;
  bool none() const noexcept { return count() == 0; }
  BinaryMask inverted() const;
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  bool operator==(const BinaryMask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Half-open pixel rectangle [x0,x1) x [y0,y1).
struct BBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const noexcept { return x1 - x0; }
  int height() const noexcept { return y1 - y0; }
  bool contains(int x, int y) const noexcept {
    return x >= x0 && x < x1 && y >= y0 && y < y1;
  }
  bool valid_for(int img_width, int img_height) const noexcept {
    return 0 <= x0 && x0 < x1 && x1 <= img_width && 0 <= y0 && y0 < y1 &&
           y1 <= img_height;
  }

  bool operator==(const BBox&) const = default;
};

}  // namespace canpr

#include "canpr/image.hpp"

#include <algorithm>
#include <string>

#include "canpr/error.hpp"

namespace canpr {

ImageF::ImageF(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  if (width <= 0 || height <= 0 || channels <= 0) {
    throw_invalid("image dimensions must be positive, got " + std::to_string(width) + "x" +
                  std::to_string(height) + "x" + std::to_string(channels));
  }
  data_.assign(plane_size() * static_cast<std::size_t>(channels), fill);
}

ImageF ImageF::channel(int c) const {
  ImageF out(width_, height_, 1);
  auto src = plane(c);
  std::copy(src.begin(), src.end(), out.data().begin());
  return out;
}

void ImageF::set_channel(int c, const ImageF& p) {
  if (!same_size(p) || p.channels() != 1) throw_invalid("set_channel: plane size mismatch");
  auto src = p.plane(0);
  std::copy(src.begin(), src.end(), plane(c).begin());
}

ImageF merge_channels(std::span<const ImageF> planes) {
  if (planes.empty()) throw_invalid("merge_channels: no planes");
  ImageF out(planes[0].width(), planes[0].height(), static_cast<int>(planes.size()));
  for (std::size_t c = 0; c < planes.size(); ++c) out.set_channel(static_cast<int>(c), planes[c]);
  return out;
}

ImageF clamped(ImageF img) {
  for (double& v : img.data()) v = std::clamp(v, 0.0, 1.0);
  return img;
}

LabImage::LabImage(ImageF planes) : planes_(std::move(planes)) {
  if (planes_.channels() != 3) throw_invalid("LabImage needs exactly 3 planes");
}

BinaryMask::BinaryMask(int width, int height, bool fill)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw_invalid("mask dimensions must be positive");
  bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BinaryMask BinaryMask::inverted() const {
  BinaryMask out = *this;
  for (auto& b : out.bits_) b = b ? 0 : 1;
  return out;
}

}  // namespace canpr

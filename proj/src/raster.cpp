#include <algorithm>
#include <cmath>
#include <vector>

#include "canpr/error.hpp"
#include "canpr/imgcore.hpp"

namespace canpr {

ImageF box_filter(const ImageF& img, int radius) {
  if (radius < 0) throw_invalid("box_filter radius must be >= 0");
  if (radius == 0) return img;
  const int w = img.width(), h = img.height();
  const std::size_t stride = static_cast<std::size_t>(w) + 1;
  std::vector<double> sat(stride * (static_cast<std::size_t>(h) + 1));
  ImageF out(w, h, img.channels());

  for (int c = 0; c < img.channels(); ++c) {
    // Summing offsets from the first sample keeps constant planes exact
    // and limits cancellation in the table.
    auto src = img.plane(c);
    const double ref = src.empty() ? 0.0 : src[0];
    std::fill(sat.begin(), sat.begin() + static_cast<std::ptrdiff_t>(stride), 0.0);
    for (int y = 0; y < h; ++y) {
      double row = 0.0;
      sat[(y + 1) * stride] = 0.0;
      for (int x = 0; x < w; ++x) {
        row += src[static_cast<std::size_t>(y) * w + x] - ref;
        sat[(y + 1) * stride + x + 1] = sat[y * stride + x + 1] + row;
      }
    }
    auto dst = out.plane(c);
    for (int y = 0; y < h; ++y) {
      const int ya = std::max(0, y - radius), yb = std::min(h, y + radius + 1);
      for (int x = 0; x < w; ++x) {
        const int xa = std::max(0, x - radius), xb = std::min(w, x + radius + 1);
        const double sum = sat[yb * stride + xb] - sat[ya * stride + xb] -
                           sat[yb * stride + xa] + sat[ya * stride + xa];
        dst[static_cast<std::size_t>(y) * w + x] = ref + sum / ((yb - ya) * (xb - xa));
      }
    }
  }
  return out;
}

namespace {

struct Tap {
  int index;
  double weight;
};

// For each destination cell, the source cells it overlaps and by how much.
std::vector<std::vector<Tap>> area_taps(int src_len, int dst_len) {
  std::vector<std::vector<Tap>> taps(dst_len);
  const double scale = static_cast<double>(src_len) / dst_len;
  for (int i = 0; i < dst_len; ++i) {
    const double lo = i * scale, hi = (i + 1) * scale;
    const int first = static_cast<int>(std::floor(lo));
    const int last = std::min(src_len - 1, static_cast<int>(std::ceil(hi)) - 1);
    for (int s = first; s <= last; ++s) {
      const double overlap = std::min<double>(hi, s + 1) - std::max<double>(lo, s);
      if (overlap > 0) taps[i].push_back({s, overlap / scale});
    }
  }
  return taps;
}

}  // namespace

ImageF resize_area(const ImageF& img, int width, int height) {
  if (width <= 0 || height <= 0) throw_invalid("resize_area: target size must be positive");
  const auto tx = area_taps(img.width(), width);
  const auto ty = area_taps(img.height(), height);
  ImageF tmp(width, img.height(), img.channels());
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < width; ++x) {
        // Offsets from the first tap keep constant runs exact.
        const double ref = img.at(tx[x].front().index, y, c);
        double acc = 0.0;
        for (const Tap& t : tx[x]) acc += t.weight * (img.at(t.index, y, c) - ref);
        tmp.at(x, y, c) = ref + acc;
      }
    }
  }
  ImageF out(width, height, img.channels());
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double ref = tmp.at(x, ty[y].front().index, c);
        double acc = 0.0;
        for (const Tap& t : ty[y]) acc += t.weight * (tmp.at(x, t.index, c) - ref);
        out.at(x, y, c) = ref + acc;
      }
    }
  }
  return out;
}

ImageF resize_bilinear(const ImageF& img, int width, int height) {
  if (width <= 0 || height <= 0) throw_invalid("resize_bilinear: target size must be positive");
  auto coord = [](int i, int src_len, int dst_len) {
    double s = (i + 0.5) * src_len / dst_len - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src_len - 1));
    const int i0 = static_cast<int>(std::floor(s));
    const int i1 = std::min(i0 + 1, src_len - 1);
    return std::tuple{i0, i1, s - i0};
  };
  ImageF out(width, height, img.channels());
  for (int y = 0; y < height; ++y) {
    const auto [y0, y1, fy] = coord(y, img.height(), height);
    for (int x = 0; x < width; ++x) {
      const auto [x0, x1, fx] = coord(x, img.width(), width);
      for (int c = 0; c < img.channels(); ++c) {
        const double top = img.at(x0, y0, c) + fx * (img.at(x1, y0, c) - img.at(x0, y0, c));
        const double bot = img.at(x0, y1, c) + fx * (img.at(x1, y1, c) - img.at(x0, y1, c));
        out.at(x, y, c) = top + fy * (bot - top);
      }
    }
  }
  return out;
}

ImageF flip_horizontal(const ImageF& img) {
  ImageF out(img.width(), img.height(), img.channels());
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x)
        out.at(img.width() - 1 - x, y, c) = img.at(x, y, c);
  return out;
}

}  // namespace canpr

// Brute-force reference implementations used only by the tests. None of them
// share code with the library.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "canpr/image.hpp"

namespace oracle {

using canpr::BBox;
using canpr::BinaryMask;
using canpr::ImageF;

// L of sRGB (0.5, 0.5, 0.5) on the unit scale, from the CIE formulas
// evaluated at 50 digits and rounded to double.
inline constexpr double kMidGrayL = 0.53388964741114306;

// Owning copy of the samples; safe to iterate over a temporary image.
inline std::vector<double> values(const ImageF& img) { return {img.data().begin(), img.data().end()}; }

inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline ImageF random_image(int w, int h, int c, std::mt19937_64& rng) {
  ImageF img(w, h, c);
  for (double& v : img.data()) v = unit(rng);
  return img;
}

inline ImageF box_filter(const ImageF& img, int r) {
  ImageF out(img.width(), img.height(), img.channels());
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        double sum = 0;
        int n = 0;
        for (int v = y - r; v <= y + r; ++v)
          for (int u = x - r; u <= x + r; ++u) {
            if (u < 0 || v < 0 || u >= img.width() || v >= img.height()) continue;
            sum += img.at(u, v, c);
            ++n;
          }
        out.at(x, y, c) = sum / n;
      }
  return out;
}

// Window statistics evaluated directly for every k, then averaged over the
// windows covering each pixel.
inline ImageF guided_filter(const ImageF& p, const ImageF& I, int r, double eps) {
  const int w = p.width(), h = p.height();
  ImageF a(w, h, 1), b(w, h, 1);
  for (int ky = 0; ky < h; ++ky)
    for (int kx = 0; kx < w; ++kx) {
      double si = 0, sp = 0, sip = 0, sii = 0;
      int n = 0;
      for (int y = std::max(0, ky - r); y <= std::min(h - 1, ky + r); ++y)
        for (int x = std::max(0, kx - r); x <= std::min(w - 1, kx + r); ++x) {
          const double iv = I.at(x, y), pv = p.at(x, y);
          si += iv;
          sp += pv;
          sip += iv * pv;
          sii += iv * iv;
          ++n;
        }
      const double mi = si / n, mp = sp / n;
      const double var = sii / n - mi * mi;
      const double ak = (sip / n - mi * mp) / (var + eps);
      a.at(kx, ky) = ak;
      b.at(kx, ky) = mp - ak * mi;
    }
  ImageF q(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double sa = 0, sb = 0;
      int n = 0;
      for (int ky = std::max(0, y - r); ky <= std::min(h - 1, y + r); ++ky)
        for (int kx = std::max(0, x - r); kx <= std::min(w - 1, x + r); ++kx) {
          sa += a.at(kx, ky);
          sb += b.at(kx, ky);
          ++n;
        }
      q.at(x, y) = sa / n * I.at(x, y) + sb / n;
    }
  return q;
}

inline ImageF bilateral(const ImageF& lab, double ss, double sr) {
  const int w = lab.width(), h = lab.height();
  const int r = static_cast<int>(std::ceil(3 * ss));
  ImageF out(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc[3] = {0, 0, 0}, total = 0;
      for (int v = y - r; v <= y + r; ++v)
        for (int u = x - r; u <= x + r; ++u) {
          if (u < 0 || v < 0 || u >= w || v >= h) continue;
          double d2 = 0;
          for (int c = 0; c < 3; ++c) d2 += std::pow(lab.at(u, v, c) - lab.at(x, y, c), 2);
          const double s2 = (u - x) * (u - x) + (v - y) * (v - y);
          const double wt = std::exp(-s2 / (2 * ss * ss)) * std::exp(-d2 / (2 * sr * sr));
          for (int c = 0; c < 3; ++c) acc[c] += wt * lab.at(u, v, c);
          total += wt;
        }
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = acc[c] / total;
    }
  return out;
}

inline std::vector<double> gaussian_table(int r, double sigma) {
  std::vector<double> t;
  double sum = 0;
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x) {
      t.push_back(std::exp(-(x * x + y * y) / (2 * sigma * sigma)));
      sum += t.back();
    }
  for (double& v : t) v /= sum;
  return t;
}

// Direct 2-D Gaussian convolution, renormalized by the in-bounds weight.
inline ImageF blur(const ImageF& img, int r, double sigma) {
  ImageF out(img.width(), img.height(), img.channels());
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        double acc = 0, total = 0;
        for (int v = y - r; v <= y + r; ++v)
          for (int u = x - r; u <= x + r; ++u) {
            if (u < 0 || v < 0 || u >= img.width() || v >= img.height()) continue;
            const double wt = std::exp(-((u - x) * (u - x) + (v - y) * (v - y)) / (2 * sigma * sigma));
            acc += wt * img.at(u, v, c);
            total += wt;
          }
        out.at(x, y, c) = acc / total;
      }
  return out;
}

inline ImageF dog(const ImageF& L, double sigma, double ratio, double tau, double phi) {
  const ImageF a = blur(L, static_cast<int>(std::ceil(3 * sigma)), sigma);
  const ImageF b = blur(L, static_cast<int>(std::ceil(3 * sigma * ratio)), sigma * ratio);
  ImageF e(L.width(), L.height(), 1);
  for (std::size_t i = 0; i < e.data().size(); ++i) {
    const double d = a.data()[i] - tau * b.data()[i];
    e.data()[i] = d > 0 ? 1.0 : 1.0 + std::tanh(phi * d);
  }
  return e;
}

// Threshold maximizing w0*w1*(mu0-mu1)^2 over every split with both classes
// non-empty, evaluated in exact rationals. -1 if no split exists.
inline int otsu(const std::array<std::uint64_t, 256>& hist) {
  using boost::multiprecision::cpp_rational;
  cpp_rational total = 0, total_sum = 0;
  for (int i = 0; i < 256; ++i) {
    total += hist[i];
    total_sum += cpp_rational(hist[i]) * i;
  }
  int best = -1;
  cpp_rational best_score = -1, n0 = 0, s0 = 0;
  for (int t = 0; t < 256; ++t) {
    n0 += hist[t];
    s0 += cpp_rational(hist[t]) * t;
    const cpp_rational n1 = total - n0, s1 = total_sum - s0;
    if (n0 == 0 || n1 == 0) continue;
    const cpp_rational w0 = n0 / total, w1 = n1 / total;
    const cpp_rational d = s0 / n0 - s1 / n1;
    const cpp_rational score = w0 * w1 * d * d;
    if (score > best_score) {
      best_score = score;
      best = t;
    }
  }
  return best;
}

struct Arc {
  int u, v;  // n = source, n+1 = sink
  long cap;
};

// Minimum s-t cut over all 2^n assignments of the inner nodes.
inline long min_cut(int n, const std::vector<Arc>& arcs) {
  long best = std::numeric_limits<long>::max();
  for (std::uint32_t set = 0; set < (1u << n); ++set) {
    auto on_source = [&](int v) { return v == n || (v < n && ((set >> v) & 1u)); };
    long cut = 0;
    for (const Arc& a : arcs)
      if (on_source(a.u) && !on_source(a.v)) cut += a.cap;
    best = std::min(best, cut);
  }
  return best;
}

// Stationary vector of a column-stochastic P (row-major, P[to*n+from]) by a
// direct linear solve of (P - I) pi = 0 with sum(pi) = 1.
inline std::vector<double> stationary(const std::vector<double>& P, int n) {
  Eigen::MatrixXd A(n + 1, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = P[i * n + j] - (i == j ? 1.0 : 0.0);
  A.row(n).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs(n) = 1.0;
  const Eigen::VectorXd pi = A.colPivHouseholderQr().solve(rhs);
  return {pi.data(), pi.data() + n};
}

inline BBox bbox_scan(const BinaryMask& m) {
  int x0 = m.width(), y0 = m.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m.at(x, y)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  return {x0, y0, x1 + 1, y1 + 1};
}

// Uniform blue field with an orange square [lo, lo+side)^2.
inline ImageF orange_square(int size, int lo, int side) {
  ImageF img(size, size, 3);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const bool in = x >= lo && x < lo + side && y >= lo && y < lo + side;
      img.at(x, y, 0) = in ? 1.0 : 0.1;
      img.at(x, y, 1) = in ? 0.55 : 0.2;
      img.at(x, y, 2) = in ? 0.1 : 0.8;
    }
  return img;
}

// Scene with a coloured rectangle over a noisy background.
inline ImageF random_scene(std::mt19937_64& rng, int size) {
  ImageF img = random_image(size, size, 3, rng);
  const double base[3] = {unit(rng), unit(rng), unit(rng)};
  const double obj[3] = {std::fmod(base[0] + 0.5, 1.0), std::fmod(base[1] + 0.5, 1.0), std::fmod(base[2] + 0.5, 1.0)};
  const int x0 = 8 + static_cast<int>(rng() % 4), y0 = 8 + static_cast<int>(rng() % 4);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const bool in = x >= x0 && x < x0 + 14 && y >= y0 && y < y0 + 12;
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = (in ? obj[c] : base[c]) * 0.7 + 0.3 * img.at(x, y, c);
    }
  return img;
}

// Textured background with a bright textured disk; used by the pipeline tests.
inline ImageF disk_scene(int w, int h, double cx, double cy, double radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ImageF img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const bool in = std::hypot(x - cx, y - cy) < radius;
      const double n = 0.04 * (unit(rng) - 0.5);
      const double tex = 0.05 * std::sin(x / 5.0) * std::cos(y / 7.0);
      img.at(x, y, 0) = in ? 0.9 + n + tex : 0.15 + n + tex;
      img.at(x, y, 1) = in ? 0.5 + n : 0.3 + n - tex;
      img.at(x, y, 2) = in ? 0.1 + n : 0.65 + n;
    }
  return canpr::clamped(std::move(img));
}

}  // namespace oracle

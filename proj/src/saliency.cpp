#include "canpr/saliency.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "canpr/error.hpp"
#include "canpr/filters.hpp"
#include "canpr/imgcore.hpp"

namespace canpr {

void SaliencyParams::validate() const {
  if (grid_width < 8) throw_invalid("saliency grid_width must be >= 8");
  if (!(sigma_frac > 0) || !(weight_floor > 0) || !(power_tol > 0) || power_max_iters <= 0) {
    throw_invalid("saliency parameters must be positive");
  }
}

SaliencyMap::SaliencyMap(ImageF values) : values_(std::move(values)) {
  if (values_.channels() != 1) throw_invalid("saliency map must be single-channel");
}

namespace {

// Spreads below this are resampling round-off, not image content.
constexpr double kFlatSpread = 1e-12;

void normalize_min_max(ImageF& img) {
  auto d = img.data();
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  const double mn = *lo, range = *hi - *lo;
  for (double& v : d) v = range > kFlatSpread ? (v - mn) / range : 0.0;
}

void normalize_max(ImageF& img) {
  auto d = img.data();
  for (double& v : d) v = std::max(v, 0.0);
  const double mx = *std::max_element(d.begin(), d.end());
  if (mx > 0) {
    for (double& v : d) v /= mx;
  } else {
    std::fill(d.begin(), d.end(), 1.0);
  }
}

ImageF orientation_energy(const ImageF& intensity) {
  const int w = intensity.width(), h = intensity.height();
  auto I = [&](int x, int y) {
    return intensity.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
  };
  const double diag = 1.0 / (2.0 * std::sqrt(2.0));
  ImageF out(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double e0 = std::abs(I(x + 1, y) - I(x - 1, y)) * 0.5;
      const double e90 = std::abs(I(x, y + 1) - I(x, y - 1)) * 0.5;
      const double e45 = std::abs(I(x + 1, y - 1) - I(x - 1, y + 1)) * diag;
      const double e135 = std::abs(I(x + 1, y + 1) - I(x - 1, y - 1)) * diag;
      out.at(x, y) = (e0 + e45) + (e90 + e135);
    }
  }
  return out;
}

}  // namespace

std::vector<ImageF> feature_maps(const ImageF& img, const SaliencyParams& params) {
  params.validate();
  if (img.channels() != 3) throw_invalid("feature_maps expects an RGB image");
  if (img.width() < 64 || img.height() < 64) {
    throw_invalid("image too small for saliency: " + std::to_string(img.width()) + "x" +
                  std::to_string(img.height()) + " (minimum 64x64)");
  }
  const int gw = params.grid_width;
  const int gh = std::max(1, static_cast<int>(std::lround(static_cast<double>(img.height()) * gw / img.width())));
  const ImageF small = resize_area(img, gw, gh);

  ImageF intensity(gw, gh, 1), rg(gw, gh, 1), by(gw, gh, 1);
  for (std::size_t i = 0; i < intensity.plane_size(); ++i) {
    const double r = small.plane(0)[i], g = small.plane(1)[i], b = small.plane(2)[i];
    intensity.data()[i] = (r + g + b) / 3.0;
    rg.data()[i] = r - g;
    by.data()[i] = b - 0.5 * (r + g);
  }
  ImageF orient = orientation_energy(intensity);

  std::vector<ImageF> maps{std::move(intensity), std::move(rg), std::move(by), std::move(orient)};
  for (ImageF& m : maps) normalize_min_max(m);
  return maps;
}

StationaryResult stationary_distribution(std::span<const double> transition, int n, double tol,
                                         int max_iters) {
  if (n <= 0 || transition.size() != static_cast<std::size_t>(n) * n) {
    throw_invalid("stationary_distribution: transition matrix size mismatch");
  }
  std::vector<double> pi(n, 1.0 / n), next(n);
  double residual = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    residual = 0.0;
    for (int to = 0; to < n; ++to) {
      const double* row = &transition[static_cast<std::size_t>(to) * n];
      double acc = 0.0;
      for (int from = 0; from < n; ++from) acc += row[from] * pi[from];
      next[to] = acc;
      residual += std::abs(acc - pi[to]);
    }
    if (residual <= tol) return {std::move(pi), it, residual};
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      pi[i] = 0.5 * (pi[i] + next[i]);
      sum += pi[i];
    }
    for (double& v : pi) v /= sum;
  }
  throw_numerical("power iteration did not converge after " + std::to_string(max_iters) +
                  " iterations (L1 residual " + std::to_string(residual) + ")");
}

std::vector<double> activation_transitions(const ImageF& feature, const SaliencyParams& params) {
  const int w = feature.width(), h = feature.height();
  const int n = w * h;
  const double sigma = params.sigma_frac * params.grid_width;
  const double coeff = -1.0 / (2.0 * sigma * sigma);
  auto F = feature.plane(0);

  std::vector<double> P(static_cast<std::size_t>(n) * n);
  for (int from = 0; from < n; ++from) {
    const int fx = from % w, fy = from / w;
    double out_sum = 0.0;
    for (int to = 0; to < n; ++to) {
      const int dx = to % w - fx, dy = to / w - fy;
      const double wgt = (std::abs(F[from] - F[to]) + params.weight_floor) *
                         std::exp(coeff * (dx * dx + dy * dy));
      P[static_cast<std::size_t>(to) * n + from] = wgt;
      out_sum += wgt;
    }
    for (int to = 0; to < n; ++to) P[static_cast<std::size_t>(to) * n + from] /= out_sum;
  }
  return P;
}

ImageF markov_activation(const ImageF& feature, const SaliencyParams& params) {
  params.validate();
  if (feature.channels() != 1) throw_invalid("markov_activation expects a single-channel map");
  const auto d = feature.data();
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  ImageF out(feature.width(), feature.height(), 1, 1.0);
  // A flat feature carries no dissimilarity; its equilibrium would only echo
  // the grid geometry, so it contributes a uniform activation.
  if (*hi - *lo == 0.0) return out;

  const int n = feature.width() * feature.height();
  const auto P = activation_transitions(feature, params);
  const auto eq = stationary_distribution(P, n, params.power_tol, params.power_max_iters);
  std::copy(eq.distribution.begin(), eq.distribution.end(), out.data().begin());
  normalize_max(out);
  return out;
}

SaliencyMap saliency_map(const ImageF& img, const SaliencyParams& params) {
  const auto features = feature_maps(img, params);
  ImageF acc(features[0].width(), features[0].height(), 1);
  for (const ImageF& f : features) {
    const ImageF act = markov_activation(f, params);
    for (std::size_t i = 0; i < acc.plane_size(); ++i) acc.data()[i] += act.data()[i];
  }
  for (double& v : acc.data()) v /= static_cast<double>(features.size());
  const double sigma = params.grid_width / 16.0;
  acc = gaussian_blur(acc, static_cast<int>(std::ceil(3.0 * sigma)), sigma);
  ImageF full = resize_bilinear(acc, img.width(), img.height());
  normalize_max(full);
  return SaliencyMap(std::move(full));
}

int histogram_bin(double v) noexcept {
  return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

Histogram256 saliency_histogram(const SaliencyMap& map) {
  Histogram256 h{};
  for (double v : map.values().data()) ++h[histogram_bin(v)];
  return h;
}

int otsu_threshold(const Histogram256& histogram) {
  using boost::multiprecision::int256_t;
  int occupied = 0;
  int256_t total = 0, total_sum = 0;
  for (int i = 0; i < 256; ++i) {
    if (histogram[i] > 0) ++occupied;
    total += histogram[i];
    total_sum += int256_t(histogram[i]) * i;
  }
  if (occupied < 2) throw_degenerate("Otsu threshold undefined: histogram occupies fewer than two bins");

  // Between-class variance times N^2 is (s0*n1 - s1*n0)^2 / (n0*n1);
  // candidates are compared as cross-multiplied fractions.
  int best = 0;
  int256_t best_num = 0, best_den = 1;
  int256_t n0 = 0, s0 = 0;
  for (int t = 0; t < 256; ++t) {
    n0 += histogram[t];
    s0 += int256_t(histogram[t]) * t;
    const int256_t n1 = total - n0, s1 = total_sum - s0;
    int256_t num = 0, den = 1;
    if (n0 > 0 && n1 > 0) {
      const int256_t diff = s0 * n1 - s1 * n0;
      num = diff * diff;
      den = n0 * n1;
    }
    if (num * best_den > best_num * den) {
      best = t;
      best_num = num;
      best_den = den;
    }
  }
  return best;
}

OtsuResult otsu_threshold(const SaliencyMap& map) {
  const int t = otsu_threshold(saliency_histogram(map));
  BinaryMask mask(map.width(), map.height());
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x) mask.set(x, y, histogram_bin(map.at(x, y)) > t);
  return {t, std::move(mask)};
}

BBox bounding_box(const BinaryMask& mask, int pad) {
  if (pad < 0) throw_invalid("bounding_box pad must be >= 0");
  int x0 = std::numeric_limits<int>::max(), y0 = x0, x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) throw_degenerate("bounding_box of an empty mask");
  return {std::max(0, x0 - pad), std::max(0, y0 - pad), std::min(mask.width(), x1 + 1 + pad),
          std::min(mask.height(), y1 + 1 + pad)};
}

}  // namespace canpr

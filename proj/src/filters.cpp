#include "canpr/filters.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "canpr/error.hpp"
#include "canpr/imgcore.hpp"

namespace canpr {

namespace {

std::vector<double> gaussian_1d(int radius, double sigma) {
  std::vector<double> k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
  return k;
}

int three_sigma_radius(double sigma) { return static_cast<int>(std::ceil(3.0 * sigma)); }

}  // namespace

GaussianKernel GaussianKernel::make(int radius, double sigma) {
  if (radius < 0 || !(sigma > 0)) throw_invalid("Gaussian kernel needs radius >= 0 and sigma > 0");
  GaussianKernel k{radius, sigma, {}};
  const int n = 2 * radius + 1;
  k.weights.resize(static_cast<std::size_t>(n) * n);
  double sum = 0.0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      double w = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      k.weights[(dy + radius) * n + dx + radius] = w;
      sum += w;
    }
  for (double& w : k.weights) w /= sum;
  return k;
}

void GuidedFilterParams::validate() const {
  if (radius < 1) throw_invalid("guided filter radius must be >= 1");
  if (!(epsilon > 0)) throw_invalid("guided filter epsilon must be > 0");
  if (!(boost >= 0)) throw_invalid("detail boost must be >= 0");
}

void AbstractionParams::validate() const {
  if (quant_levels < 2) throw_invalid("quant_levels must be >= 2");
  if (bilateral_iterations < 1) throw_invalid("bilateral_iterations must be >= 1");
  if (!(spatial_sigma > 0) || !(range_sigma > 0) || !(dog_sigma > 0) || !(dog_ratio > 0)) {
    throw_invalid("abstraction sigmas must be > 0");
  }
}

ImageF gaussian_blur(const ImageF& img, int radius, double sigma) {
  if (!(sigma > 0)) throw_invalid("gaussian_blur sigma must be > 0");
  if (radius < 0) throw_invalid("gaussian_blur radius must be >= 0");
  const auto k = gaussian_1d(radius, sigma);
  const int w = img.width(), h = img.height();
  ImageF tmp(w, h, img.channels());
  ImageF out(w, h, img.channels());
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int lo = std::max(-radius, -x), hi = std::min(radius, w - 1 - x);
        double acc = 0.0, norm = 0.0;
        for (int d = lo; d <= hi; ++d) {
          acc += k[d + radius] * img.at(x + d, y, c);
          norm += k[d + radius];
        }
        tmp.at(x, y, c) = acc / norm;
      }
    }
    for (int y = 0; y < h; ++y) {
      const int lo = std::max(-radius, -y), hi = std::min(radius, h - 1 - y);
      double norm = 0.0;
      for (int d = lo; d <= hi; ++d) norm += k[d + radius];
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int d = lo; d <= hi; ++d) acc += k[d + radius] * tmp.at(x, y + d, c);
        out.at(x, y, c) = acc / norm;
      }
    }
  }
  return out;
}

LabImage bilateral_filter(const LabImage& lab, double spatial_sigma, double range_sigma) {
  if (!(spatial_sigma > 0) || !(range_sigma > 0)) throw_invalid("bilateral sigmas must be > 0");
  const int w = lab.width(), h = lab.height();
  const int r = three_sigma_radius(spatial_sigma);
  const int n = 2 * r + 1;
  std::vector<double> spatial(static_cast<std::size_t>(n) * n);
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      spatial[(dy + r) * n + dx + r] = std::exp(-(dx * dx + dy * dy) / (2.0 * spatial_sigma * spatial_sigma));
  const double range_coeff = -1.0 / (2.0 * range_sigma * range_sigma);

  auto L = lab.L(), A = lab.a(), B = lab.b();
  ImageF out(w, h, 3);
  auto oL = out.plane(0), oA = out.plane(1), oB = out.plane(2);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      const double cl = L[p], ca = A[p], cb = B[p];
      double sw = 0.0, sl = 0.0, sa = 0.0, sb = 0.0;
      for (int qy = y0; qy <= y1; ++qy) {
        const double* srow = &spatial[(qy - y + r) * n + (x0 - x + r)];
        const std::size_t row = static_cast<std::size_t>(qy) * w;
        for (int qx = x0; qx <= x1; ++qx) {
          const std::size_t q = row + qx;
          const double dl = L[q] - cl, da = A[q] - ca, db = B[q] - cb;
          const double wgt = srow[qx - x0] * std::exp(range_coeff * (dl * dl + da * da + db * db));
          sw += wgt;
          sl += wgt * dl;
          sa += wgt * da;
          sb += wgt * db;
        }
      }
      // Offsets from the centre keep flat regions bit-exact.
      oL[p] = cl + sl / sw;
      oA[p] = ca + sa / sw;
      oB[p] = cb + sb / sw;
    }
  }
  return LabImage(std::move(out));
}

ImageF guided_filter(const ImageF& p, const ImageF& guide, int radius, double epsilon) {
  if (!p.same_shape(guide) || p.channels() != 1) {
    throw_invalid("guided_filter needs single-channel input and guide of equal size");
  }
  if (radius < 0 || !(epsilon > 0)) throw_invalid("guided_filter needs radius >= 0 and epsilon > 0");
  const std::size_t n = p.plane_size();
  auto I = guide.plane(0), P = p.plane(0);

  ImageF ip(p.width(), p.height(), 1), ii(p.width(), p.height(), 1);
  for (std::size_t i = 0; i < n; ++i) {
    ip.data()[i] = I[i] * P[i];
    ii.data()[i] = I[i] * I[i];
  }
  const ImageF mean_i = box_filter(guide, radius);
  const ImageF mean_p = box_filter(p, radius);
  const ImageF corr_ip = box_filter(ip, radius);
  const ImageF corr_ii = box_filter(ii, radius);

  ImageF a(p.width(), p.height(), 1), b(p.width(), p.height(), 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double mi = mean_i.data()[i], mp = mean_p.data()[i];
    const double var = corr_ii.data()[i] - mi * mi;
    const double cov = corr_ip.data()[i] - mi * mp;
    a.data()[i] = cov / (var + epsilon);
    b.data()[i] = mp - a.data()[i] * mi;
  }
  const ImageF mean_a = box_filter(a, radius);
  const ImageF mean_b = box_filter(b, radius);
  ImageF q(p.width(), p.height(), 1);
  for (std::size_t i = 0; i < n; ++i) q.data()[i] = mean_a.data()[i] * I[i] + mean_b.data()[i];
  return q;
}

ImageF detail_exaggerate(const ImageF& img, const GuidedFilterParams& params) {
  params.validate();
  ImageF out(img.width(), img.height(), img.channels());
  for (int c = 0; c < img.channels(); ++c) {
    const ImageF ch = img.channel(c);
    const ImageF base = guided_filter(ch, ch, params.radius, params.epsilon);
    auto src = ch.plane(0), bs = base.plane(0);
    auto dst = out.plane(c);
    // ch + (boost-1)*detail keeps boost == 1 an exact identity.
    for (std::size_t i = 0; i < src.size(); ++i) {
      dst[i] = std::clamp(src[i] + (params.boost - 1.0) * (src[i] - bs[i]), 0.0, 1.0);
    }
  }
  return out;
}

LabImage quantize_luminance(const LabImage& lab, int levels) {
  if (levels < 2) throw_invalid("quantize_luminance needs levels >= 2");
  LabImage out = lab;
  const double steps = levels - 1;
  for (double& l : out.L()) l = std::round(l * steps) / steps;
  return out;
}

ImageF dog_edges(const ImageF& luminance, const AbstractionParams& params) {
  params.validate();
  if (luminance.channels() != 1) throw_invalid("dog_edges expects a single-channel image");
  const double s1 = params.dog_sigma, s2 = params.dog_sigma * params.dog_ratio;
  const ImageF g1 = gaussian_blur(luminance, three_sigma_radius(s1), s1);
  const ImageF g2 = gaussian_blur(luminance, three_sigma_radius(s2), s2);
  ImageF edges(luminance.width(), luminance.height(), 1);
  for (std::size_t i = 0; i < edges.plane_size(); ++i) {
    const double d = g1.data()[i] - params.dog_tau * g2.data()[i];
    edges.data()[i] = d > 0 ? 1.0 : 1.0 + std::tanh(params.dog_sharpness * d);
  }
  return edges;
}

AbstractionLayers abstract_layers(const ImageF& img, const AbstractionParams& params) {
  params.validate();
  LabImage filtered = rgb_to_lab(img);
  for (int it = 0; it < params.bilateral_iterations; ++it) {
    filtered = bilateral_filter(filtered, params.spatial_sigma, params.range_sigma);
  }
  LabImage quantized = quantize_luminance(filtered, params.quant_levels);
  ImageF edges = dog_edges(filtered.planes().channel(0), params);
  LabImage combined = quantized;
  auto L = combined.L();
  for (std::size_t i = 0; i < L.size(); ++i) L[i] *= edges.data()[i];
  return {std::move(filtered), std::move(quantized), std::move(edges), std::move(combined)};
}

ImageF abstract_image(const ImageF& img, const AbstractionParams& params) {
  return lab_to_rgb(abstract_layers(img, params).combined);
}

}  // namespace canpr

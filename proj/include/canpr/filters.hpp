#pragma once

#include <vector>

#include "canpr/image.hpp"

namespace canpr {

/// Normalized 2-D Gaussian over a (2r+1)^2 support, row-major.
struct GaussianKernel {
  int radius = 0;
  double sigma = 1.0;
  std::vector<double> weights;

  static GaussianKernel make(int radius, double sigma);
  double at(int dx, int dy) const { return weights[(dy + radius) * (2 * radius + 1) + dx + radius]; }
};

/// Base/detail decomposition settings for detail exaggeration.
struct GuidedFilterParams {
  int radius = 8;
  double epsilon = 0.01;
  double boost = 4.0;  // detail multiplier

  void validate() const;
  bool operator==(const GuidedFilterParams&) const = default;
};

/// Cartoon abstraction settings. Spatial sigma 3, range sigma 0.1 and ten
/// luminance levels are the published settings; the DoG constants follow the
/// usual real-time abstraction values.
struct AbstractionParams {
  double spatial_sigma = 3.0;
  double range_sigma = 0.1;
  int quant_levels = 10;
  int bilateral_iterations = 2;
  double dog_sigma = 1.0;
  double dog_ratio = 1.6;
  double dog_tau = 0.98;
  double dog_sharpness = 5.0;

  void validate() const;
  bool operator==(const AbstractionParams&) const = default;
};

/// Separable Gaussian convolution, shrinking-window border.
ImageF gaussian_blur(const ImageF& img, int radius, double sigma);

/// Joint-range bilateral filter on Lab; window radius ceil(3*spatial_sigma).
/// All three planes share one weight field driven by the full Lab distance.
LabImage bilateral_filter(const LabImage& lab, double spatial_sigma, double range_sigma);

/// He et al. guided filter for single-channel input `p` and guide `guide`.
ImageF guided_filter(const ImageF& p, const ImageF& guide, int radius, double epsilon);

/// Per channel: base = guided_filter(ch, ch), out = clamp(base + boost*(ch - base)).
ImageF detail_exaggerate(const ImageF& img, const GuidedFilterParams& params);

/// Hard quantization of L to `levels` evenly spaced values; a and b untouched.
LabImage quantize_luminance(const LabImage& lab, int levels);

/// Difference-of-Gaussians edge map in (0,1]; values below 1 mark edges.
ImageF dog_edges(const ImageF& luminance, const AbstractionParams& params);

/// Intermediate planes of the abstraction, exposed for inspection and tests.
struct AbstractionLayers {
  LabImage filtered;   // after the bilateral passes
  LabImage quantized;  // L quantized, before edge darkening
  ImageF edges;        // DoG edge map
  LabImage combined;   // L = quantized L * edges
};

AbstractionLayers abstract_layers(const ImageF& img, const AbstractionParams& params);
ImageF abstract_image(const ImageF& img, const AbstractionParams& params);

}  // namespace canpr

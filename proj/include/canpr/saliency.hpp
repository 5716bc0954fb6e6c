#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "canpr/image.hpp"

namespace canpr {

struct SaliencyParams {
  int grid_width = 32;         // nodes across the coarse grid
  double sigma_frac = 0.15;    // proximity scale as a fraction of grid_width
  double weight_floor = 1e-6;  // keeps the chain ergodic on flat features
  double power_tol = 1e-6;     // L1 stopping tolerance
  int power_max_iters = 1000;

  void validate() const;
  bool operator==(const SaliencyParams&) const = default;
};

/// Single-channel map in [0,1] with maximum 1, at input resolution.
class SaliencyMap {
 public:
  SaliencyMap() = default;
  explicit SaliencyMap(ImageF values);

  int width() const noexcept { return values_.width(); }
  int height() const noexcept { return values_.height(); }
  double at(int x, int y) const noexcept { return values_.at(x, y); }
  const ImageF& values() const noexcept { return values_; }

 private:
  ImageF values_;
};

/// Coarse feature channels in order: intensity, red-green, blue-yellow,
/// orientation energy. Each is min-max normalized (constant -> zeros).
std::vector<ImageF> feature_maps(const ImageF& img, const SaliencyParams& params);

struct StationaryResult {
  std::vector<double> distribution;
  int iterations = 0;
  double residual = 0.0;  // ||P pi - pi||_1 of the returned pi
};

/// Stationary distribution of a column-stochastic matrix stored row-major,
/// transition[to * n + from]. Iterates the lazy chain (P + I)/2, which has
/// the same fixed point and cannot oscillate; stops once ||P pi - pi||_1 <= tol.
StationaryResult stationary_distribution(std::span<const double> transition, int n, double tol,
                                         int max_iters);

/// Column-stochastic transition matrix of the dissimilarity graph over `feature`.
std::vector<double> activation_transitions(const ImageF& feature, const SaliencyParams& params);

/// Equilibrium mass of the dissimilarity chain, reshaped to the grid, max 1.
ImageF markov_activation(const ImageF& feature, const SaliencyParams& params);

SaliencyMap saliency_map(const ImageF& img, const SaliencyParams& params);

/// Pluggable saliency provider; the pipeline defaults to saliency_map.
using SaliencyBackend = std::function<SaliencyMap(const ImageF&, const SaliencyParams&)>;

using Histogram256 = std::array<std::uint64_t, 256>;

/// round(clamp(v)*255).
int histogram_bin(double v) noexcept;
Histogram256 saliency_histogram(const SaliencyMap& map);

/// Bin t maximizing the between-class variance of {<= t} vs {> t}, compared
/// exactly in integer arithmetic; ties go to the lower t. Throws
/// DegenerateInput when fewer than two bins are occupied.
int otsu_threshold(const Histogram256& histogram);

struct OtsuResult {
  int threshold = 0;  // bin index; mask = histogram_bin(value) > threshold
  BinaryMask mask;
};

OtsuResult otsu_threshold(const SaliencyMap& map);

/// Tightest box around the true pixels, grown by `pad` and clamped.
BBox bounding_box(const BinaryMask& mask, int pad);

}  // namespace canpr

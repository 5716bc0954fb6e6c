#pragma once

#include <vector>

#include "canpr/image.hpp"

namespace canpr {

enum class CompositeMode { Feather, GradientBlend };

struct CompositeRequest {
  const ImageF* source = nullptr;  // processed image, taken inside the mask
  const ImageF* dest = nullptr;    // image receiving the insert
  const BinaryMask* mask = nullptr;
  CompositeMode mode = CompositeMode::GradientBlend;
  int feather_width = 5;
  double solver_tol = 1e-5;
  int solver_max_iters = 10000;
};

struct CompositeResult {
  ImageF image;
  /// GradientBlend only: per channel relative residual ||A x - b|| / ||b||
  /// and iteration count of the final solve.
  std::vector<double> residuals;
  std::vector<int> iterations;
};

/// Exact Euclidean distance from every pixel to the nearest pixel where
/// mask == target (0 on those pixels, +inf if there are none).
ImageF distance_to(const BinaryMask& mask, bool target);

/// alpha = clamp(0.5 + sd/(2*width)), sd = distance to the nearest outside
/// pixel when inside, minus the distance to the nearest inside pixel when
/// outside. width 0 gives the hard mask.
ImageF feather_alpha(const BinaryMask& mask, int width);

/// Pixels within Euclidean distance `radius` of the mask.
BinaryMask dilate(const BinaryMask& mask, int radius);

/// Feather: alpha blend with feathered alpha. GradientBlend: per channel,
/// solve the 5-point Poisson equation with the source Laplacian as guidance
/// over the mask dilated by feather_width, Dirichlet values from dest.
CompositeResult composite(const CompositeRequest& req);

}  // namespace canpr

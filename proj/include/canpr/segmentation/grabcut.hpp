#pragma once

#include <cstdint>
#include <vector>

#include "canpr/image.hpp"
#include "canpr/segmentation/gmm.hpp"

namespace canpr {

enum class PixelLabel : std::uint8_t { HardBG, HardFG, ProbBG, ProbFG };

inline bool is_foreground(PixelLabel l) noexcept {
  return l == PixelLabel::HardFG || l == PixelLabel::ProbFG;
}

struct GrabCutOptions {
  int max_iters = 10;
  std::uint64_t seed = 0;  // drives the k-means++ initialization
  double gamma = 50.0;
  int components = Gmm::kDefaultComponents;
  double reg_floor = Gmm::kDefaultRegFloor;
  double rel_tol = 1e-3;  // stop when the relative energy decrease drops below this

  void validate() const;
};

struct GrabCutState {
  std::vector<PixelLabel> labels;
  Gmm fg_gmm;
  Gmm bg_gmm;
  double energy = 0.0;
  int iteration = 0;
};

struct GrabCutResult {
  BinaryMask mask;
  GrabCutState state;
  std::vector<double> energies;  // total energy after each iteration
};

/// Box-seeded GrabCut with hard-assignment GMMs and an 8-connected graph cut.
/// Each iteration reassigns components, refits both mixtures and solves the
/// cut, so the energy sequence is non-increasing.
GrabCutResult grabcut(const ImageF& img, const BBox& box, const GrabCutOptions& opts = {});

/// Contrast parameter 1 / (2 * mean ||z_m - z_n||^2) over all 8-neighbour pairs.
double grabcut_beta(const ImageF& img);

/// Energy of a labelling under fixed models: per-pixel min over components
/// of -log(w_k N(z)), plus gamma*exp(-beta*||dz||^2)/dist for each
/// 8-neighbour pair with differing labels.
double grabcut_energy(const ImageF& img, const std::vector<PixelLabel>& labels, const Gmm& fg,
                      const Gmm& bg, double gamma, double beta);

}  // namespace canpr

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace canpr {

using Rgb = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

struct GmmComponent {
  double weight = 0.0;  // 0 marks an unused slot
  Rgb mean{};
  Mat3 covariance{};
  Mat3 inverse{};
  double log_det = 0.0;
};

/// Full-covariance colour mixture. Slots with zero weight are ignored.
class Gmm {
 public:
  static constexpr int kDefaultComponents = 5;
  static constexpr double kDefaultRegFloor = 1e-5;

  Gmm() = default;
  explicit Gmm(std::vector<GmmComponent> components) : components_(std::move(components)) {}

  int size() const noexcept { return static_cast<int>(components_.size()); }
  const GmmComponent& component(int k) const { return components_[k]; }
  int active_components() const noexcept;

  /// -log(weight_k * N(z | mean_k, cov_k)); +inf for an unused slot.
  double component_cost(int k, const Rgb& z) const noexcept;

  struct Best {
    int component;
    double cost;
  };
  /// Cheapest component for z (lowest index on ties).
  Best best_component(const Rgb& z) const noexcept;

 private:
  std::vector<GmmComponent> components_;
};

/// Maximum-likelihood refit from hard assignments. Covariance eigenvalues
/// are floored at `reg_floor`; components without pixels are dropped and
/// the remaining weights renormalized.
Gmm gmm_fit(std::span<const Rgb> pixels, std::span<const int> assignments,
            int components = Gmm::kDefaultComponents, double reg_floor = Gmm::kDefaultRegFloor);

/// Seeded k-means++ followed by at most 10 Lloyd iterations. Returns one
/// component index per pixel. K is reduced when there are fewer pixels
/// (or fewer distinct colours) than components.
std::vector<int> gmm_init(std::span<const Rgb> pixels, int components, std::uint64_t seed);

}  // namespace canpr

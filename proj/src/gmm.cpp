#include "canpr/segmentation/gmm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "canpr/error.hpp"

namespace canpr {

namespace {

constexpr double kHalfLog2Pi3 = 1.5 * 1.8378770664093453;  // (3/2) log(2 pi)

double sq_dist(const Rgb& a, const Rgb& b) {
  const double d0 = a[0] - b[0], d1 = a[1] - b[1], d2 = a[2] - b[2];
  return d0 * d0 + d1 * d1 + d2 * d2;
}

// Uniform double in [0,1) from the top 53 bits; independent of the
// standard library's distribution implementations.
double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

int Gmm::active_components() const noexcept {
  return static_cast<int>(std::count_if(components_.begin(), components_.end(),
                                        [](const GmmComponent& c) { return c.weight > 0; }));
}

double Gmm::component_cost(int k, const Rgb& z) const noexcept {
  const GmmComponent& c = components_[k];
  if (!(c.weight > 0)) return std::numeric_limits<double>::infinity();
  const double d[3] = {z[0] - c.mean[0], z[1] - c.mean[1], z[2] - c.mean[2]};
  double maha = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) maha += d[i] * c.inverse[i][j] * d[j];
  return -std::log(c.weight) + 0.5 * c.log_det + 0.5 * maha + kHalfLog2Pi3;
}

Gmm::Best Gmm::best_component(const Rgb& z) const noexcept {
  Best best{-1, std::numeric_limits<double>::infinity()};
  for (int k = 0; k < size(); ++k) {
    const double cost = component_cost(k, z);
    if (cost < best.cost) best = {k, cost};
  }
  return best;
}

Gmm gmm_fit(std::span<const Rgb> pixels, std::span<const int> assignments, int components,
            double reg_floor) {
  if (pixels.empty()) throw_invalid("gmm_fit: no pixels");
  if (pixels.size() != assignments.size()) throw_invalid("gmm_fit: assignment count mismatch");
  if (components <= 0) throw_invalid("gmm_fit: need at least one component");

  std::vector<std::size_t> counts(components, 0);
  std::vector<Eigen::Vector3d> sums(components, Eigen::Vector3d::Zero());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const int k = assignments[i];
    if (k < 0 || k >= components) throw_invalid("gmm_fit: component index out of range");
    ++counts[k];
    sums[k] += Eigen::Vector3d(pixels[i][0], pixels[i][1], pixels[i][2]);
  }
  std::vector<Eigen::Vector3d> means(components);
  for (int k = 0; k < components; ++k) means[k] = counts[k] ? Eigen::Vector3d(sums[k] / counts[k]) : Eigen::Vector3d::Zero();

  // Centred second moments: exact for flat clusters, where raw moments cancel badly.
  std::vector<Eigen::Matrix3d> scatter(components, Eigen::Matrix3d::Zero());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const int k = assignments[i];
    const Eigen::Vector3d d = Eigen::Vector3d(pixels[i][0], pixels[i][1], pixels[i][2]) - means[k];
    scatter[k] += d * d.transpose();
  }

  std::vector<GmmComponent> out(components);
  const double total = static_cast<double>(pixels.size());
  for (int k = 0; k < components; ++k) {
    if (counts[k] == 0) continue;
    GmmComponent& c = out[k];
    c.weight = counts[k] / total;
    for (int i = 0; i < 3; ++i) c.mean[i] = means[k][i];

    const Eigen::Matrix3d cov = scatter[k] / static_cast<double>(counts[k]);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    const Eigen::Vector3d lambda = eig.eigenvalues().cwiseMax(reg_floor);
    const Eigen::Matrix3d& V = eig.eigenvectors();
    const Eigen::Matrix3d reg = V * lambda.asDiagonal() * V.transpose();
    const Eigen::Matrix3d inv = V * lambda.cwiseInverse().asDiagonal() * V.transpose();
    c.log_det = lambda.array().log().sum();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        c.covariance[i][j] = 0.5 * (reg(i, j) + reg(j, i));
        c.inverse[i][j] = 0.5 * (inv(i, j) + inv(j, i));
      }
  }
  return Gmm(std::move(out));
}

std::vector<int> gmm_init(std::span<const Rgb> pixels, int components, std::uint64_t seed) {
  if (components <= 0) throw_invalid("gmm_init: need at least one component");
  const std::size_t n = pixels.size();
  std::vector<int> assign(n, 0);
  if (n == 0) return assign;
  const int k_max = static_cast<int>(std::min<std::size_t>(components, n));
  if (k_max == 1) return assign;

  std::mt19937_64 rng(seed);
  std::vector<Rgb> centers;
  centers.push_back(pixels[rng() % n]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(pixels[i], centers[0]);
  while (static_cast<int>(centers.size()) < k_max) {
    double total = 0.0;
    for (double v : d2) total += v;
    if (!(total > 0)) break;  // every pixel already coincides with a centre
    const double target = unit_double(rng) * total;
    std::size_t pick = n - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += d2[i];
      if (acc > target && d2[i] > 0) {
        pick = i;
        break;
      }
    }
    if (!(d2[pick] > 0)) {
      pick = static_cast<std::size_t>(std::distance(d2.begin(), std::max_element(d2.begin(), d2.end())));
    }
    centers.push_back(pixels[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(pixels[i], centers.back()));
  }

  const int k = static_cast<int>(centers.size());
  auto nearest = [&](const Rgb& z) {
    int best = 0;
    double bd = sq_dist(z, centers[0]);
    for (int c = 1; c < k; ++c) {
      const double d = sq_dist(z, centers[c]);
      if (d < bd) {
        bd = d;
        best = c;
      }
    }
    return best;
  };

  for (std::size_t i = 0; i < n; ++i) assign[i] = nearest(pixels[i]);
  for (int iter = 0; iter < 10; ++iter) {
    std::vector<Rgb> sum(k, Rgb{0, 0, 0});
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) sum[assign[i]][c] += pixels[i][c];
      ++cnt[assign[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (cnt[c] == 0) continue;  // keep the old centre
      for (int j = 0; j < 3; ++j) centers[c][j] = sum[c][j] / static_cast<double>(cnt[c]);
    }
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int a = nearest(pixels[i]);
      changed |= a != assign[i];
      assign[i] = a;
    }
    if (!changed) break;
  }
  return assign;
}

}  // namespace canpr

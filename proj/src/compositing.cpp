#include "canpr/compositing.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "canpr/error.hpp"

namespace canpr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Felzenszwalb-Huttenlocher lower envelope of parabolas over the finite
// samples of f; squared distances out.
void edt_1d(const std::vector<double>& f, std::vector<double>& out, std::vector<int>& v,
            std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s;
    for (;;) {
      const int p = v[k];
      s = ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) / (2.0 * (q - p));
      if (s > z[k]) break;
      --k;  // z[0] is -inf, so k never drops below 0
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(out.begin(), out.end(), kInf);
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double d = q - v[k];
    out[q] = d * d + f[v[k]];
  }
}

ImageF squared_distance_to(const BinaryMask& mask, bool target) {
  const int w = mask.width(), h = mask.height();
  ImageF d2(w, h, 1);
  const int len = std::max(w, h);
  std::vector<double> z(len + 1);
  std::vector<int> v(len);

  std::vector<double> col(h), col_out(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) col[y] = mask.at(x, y) == target ? 0.0 : kInf;
    edt_1d(col, col_out, v, z);
    for (int y = 0; y < h; ++y) d2.at(x, y) = col_out[y];
  }
  std::vector<double> row(w), row_out(w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) row[x] = d2.at(x, y);
    edt_1d(row, row_out, v, z);
    for (int x = 0; x < w; ++x) d2.at(x, y) = row_out[x];
  }
  return d2;
}

void check_request(const CompositeRequest& req) {
  if (!req.source || !req.dest || !req.mask) throw_invalid("composite: source, dest and mask are required");
  const ImageF& s = *req.source;
  const ImageF& d = *req.dest;
  if (!s.same_shape(d)) throw_invalid("composite: source and dest differ in shape");
  if (req.mask->width() != s.width() || req.mask->height() != s.height()) {
    throw_invalid("composite: mask size differs from the images");
  }
  if (req.feather_width < 0) throw_invalid("composite: feather_width must be >= 0");
  if (!(req.solver_tol > 0) || req.solver_max_iters <= 0) {
    throw_invalid("composite: solver tolerance and iteration cap must be positive");
  }
}

CompositeResult feather_blend(const CompositeRequest& req) {
  const ImageF alpha = feather_alpha(*req.mask, req.feather_width);
  const ImageF& s = *req.source;
  const ImageF& d = *req.dest;
  CompositeResult res{ImageF(s.width(), s.height(), s.channels()), {}, {}};
  auto a = alpha.plane(0);
  for (int c = 0; c < s.channels(); ++c) {
    auto sp = s.plane(c), dp = d.plane(c);
    auto op = res.image.plane(c);
    for (std::size_t i = 0; i < a.size(); ++i) {
      // Exact at alpha 0 and 1 and where source equals dest; the clamp
      // keeps rounding inside the convex hull.
      if (a[i] >= 1.0) {
        op[i] = sp[i];
        continue;
      }
      const double v = dp[i] + a[i] * (sp[i] - dp[i]);
      op[i] = std::clamp(v, std::min(sp[i], dp[i]), std::max(sp[i], dp[i]));
    }
  }
  return res;
}

CompositeResult poisson_blend(const CompositeRequest& req) {
  const ImageF& s = *req.source;
  const ImageF& d = *req.dest;
  const int w = s.width(), h = s.height();
  const BinaryMask region = dilate(*req.mask, req.feather_width);

  std::vector<int> index(region.size(), -1);
  int unknowns = 0;
  for (std::size_t i = 0; i < region.size(); ++i)
    if (region[i]) index[i] = unknowns++;

  CompositeResult res{d, {}, {}};
  if (unknowns == 0) return res;
  if (static_cast<std::size_t>(unknowns) == region.size()) {
    // No Dirichlet boundary left: the insert is the whole source.
    res.image = clamped(s);
    res.residuals.assign(s.channels(), 0.0);
    res.iterations.assign(s.channels(), 0);
    return res;
  }

  constexpr int kDx[4] = {-1, 1, 0, 0};
  constexpr int kDy[4] = {0, 0, -1, 1};

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(unknowns) * 5);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int row = index[static_cast<std::size_t>(y) * w + x];
      if (row < 0) continue;
      int degree = 0;
      for (int k = 0; k < 4; ++k) {
        const int nx = x + kDx[k], ny = y + kDy[k];
        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
        ++degree;
        const int col = index[static_cast<std::size_t>(ny) * w + nx];
        if (col >= 0) triplets.emplace_back(row, col, -1.0);
      }
      triplets.emplace_back(row, row, static_cast<double>(degree));
    }
  Eigen::SparseMatrix<double> A(unknowns, unknowns);
  A.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::IncompleteCholesky<double>>
      cg;
  cg.setMaxIterations(req.solver_max_iters);
  // The solver's own residual is a recurrence; leave margin for the true one.
  cg.setTolerance(0.5 * req.solver_tol);
  cg.compute(A);
  if (cg.info() != Eigen::Success) throw_numerical("composite: preconditioner factorization failed");

  for (int c = 0; c < s.channels(); ++c) {
    Eigen::VectorXd b(unknowns), guess(unknowns);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * w + x;
        const int row = index[p];
        if (row < 0) continue;
        double rhs = 0.0;
        for (int k = 0; k < 4; ++k) {
          const int nx = x + kDx[k], ny = y + kDy[k];
          if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
          const std::size_t q = static_cast<std::size_t>(ny) * w + nx;
          rhs += s.at(x, y, c) - s.at(nx, ny, c);
          if (index[q] < 0) rhs += d.at(nx, ny, c);
        }
        b[row] = rhs;
        guess[row] = s.at(x, y, c);
      }

    const Eigen::VectorXd sol = cg.solveWithGuess(b, guess);
    const double bnorm = b.norm();
    const double rnorm = (A * sol - b).norm();
    const double residual = bnorm > 0 ? rnorm / bnorm : rnorm;
    if (!(residual <= req.solver_tol)) {
      std::ostringstream msg;
      msg << "Poisson solve did not converge on channel " << c << ": relative residual "
          << residual << " after " << cg.iterations() << " iterations (tolerance "
          << req.solver_tol << ")";
      throw_numerical(msg.str());
    }
    res.residuals.push_back(residual);
    res.iterations.push_back(static_cast<int>(cg.iterations()));

    auto out = res.image.plane(c);
    for (std::size_t p = 0; p < index.size(); ++p)
      if (index[p] >= 0) out[p] = std::clamp(sol[index[p]], 0.0, 1.0);
  }
  return res;
}

}  // namespace

ImageF distance_to(const BinaryMask& mask, bool target) {
  ImageF d = squared_distance_to(mask, target);
  for (double& v : d.data()) v = std::sqrt(v);
  return d;
}

ImageF feather_alpha(const BinaryMask& mask, int width) {
  if (width < 0) throw_invalid("feather_alpha width must be >= 0");
  ImageF alpha(mask.width(), mask.height(), 1);
  if (width == 0) {
    for (std::size_t i = 0; i < mask.size(); ++i) alpha.data()[i] = mask[i] ? 1.0 : 0.0;
    return alpha;
  }
  const ImageF to_outside = distance_to(mask, false);
  const ImageF to_inside = distance_to(mask, true);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double sd = mask[i] ? to_outside.data()[i] : -to_inside.data()[i];
    alpha.data()[i] = std::clamp(0.5 + sd / (2.0 * width), 0.0, 1.0);
  }
  return alpha;
}

BinaryMask dilate(const BinaryMask& mask, int radius) {
  if (radius < 0) throw_invalid("dilate radius must be >= 0");
  const ImageF d2 = squared_distance_to(mask, true);
  BinaryMask out(mask.width(), mask.height());
  const double r2 = static_cast<double>(radius) * radius;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) out.set(x, y, d2.at(x, y) <= r2);
  return out;
}

CompositeResult composite(const CompositeRequest& req) {
  check_request(req);
  if (req.mask->none()) return {*req.dest, {}, {}};
  return req.mode == CompositeMode::Feather ? feather_blend(req) : poisson_blend(req);
}

}  // namespace canpr

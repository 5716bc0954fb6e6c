#include "canpr/segmentation/grabcut.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "canpr/error.hpp"
#include "canpr/segmentation/maxflow.hpp"

namespace canpr {

namespace {

// Forward half of the 8-neighbourhood; each unordered pair is visited once.
constexpr int kOffsets[4][2] = {{1, 0}, {0, 1}, {1, 1}, {-1, 1}};
const double kOffsetDist[4] = {1.0, 1.0, std::sqrt(2.0), std::sqrt(2.0)};

std::vector<Rgb> gather_pixels(const ImageF& img) {
  std::vector<Rgb> px(img.plane_size());
  auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = {r[i], g[i], b[i]};
  return px;
}

double sq_diff(const Rgb& a, const Rgb& b) {
  const double d0 = a[0] - b[0], d1 = a[1] - b[1], d2 = a[2] - b[2];
  return d0 * d0 + d1 * d1 + d2 * d2;
}

template <typename Fn>
void for_each_pair(int w, int h, Fn&& fn) {
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int o = 0; o < 4; ++o) {
        const int nx = x + kOffsets[o][0], ny = y + kOffsets[o][1];
        if (nx < 0 || nx >= w || ny >= h) continue;
        fn(x, y, nx, ny, o);
      }
}

double data_cost(const Gmm& gmm, const Rgb& z) { return gmm.best_component(z).cost; }

Gmm fit_label(const std::vector<Rgb>& px, const std::vector<PixelLabel>& labels,
              const std::vector<int>& comps, bool foreground, const GrabCutOptions& opts) {
  std::vector<Rgb> sel;
  std::vector<int> sel_comp;
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (is_foreground(labels[i]) != foreground) continue;
    sel.push_back(px[i]);
    sel_comp.push_back(comps[i]);
  }
  return gmm_fit(sel, sel_comp, opts.components, opts.reg_floor);
}

}  // namespace

void GrabCutOptions::validate() const {
  if (max_iters < 1) throw_invalid("grabcut max_iters must be >= 1");
  if (components < 1) throw_invalid("grabcut needs at least one GMM component");
  if (!(gamma >= 0) || !(reg_floor > 0) || !(rel_tol >= 0)) {
    throw_invalid("grabcut gamma, reg_floor and rel_tol must be non-negative");
  }
}

double grabcut_beta(const ImageF& img) {
  const auto px = gather_pixels(img);
  const int w = img.width();
  double sum = 0.0;
  std::size_t count = 0;
  for_each_pair(img.width(), img.height(), [&](int x, int y, int nx, int ny, int) {
    sum += sq_diff(px[static_cast<std::size_t>(y) * w + x], px[static_cast<std::size_t>(ny) * w + nx]);
    ++count;
  });
  if (count == 0 || !(sum > 0)) return 0.0;
  return 1.0 / (2.0 * sum / static_cast<double>(count));
}

double grabcut_energy(const ImageF& img, const std::vector<PixelLabel>& labels, const Gmm& fg,
                      const Gmm& bg, double gamma, double beta) {
  const auto px = gather_pixels(img);
  const int w = img.width();
  double data = 0.0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    data += data_cost(is_foreground(labels[i]) ? fg : bg, px[i]);
  }
  double smooth = 0.0;
  for_each_pair(img.width(), img.height(), [&](int x, int y, int nx, int ny, int o) {
    const std::size_t p = static_cast<std::size_t>(y) * w + x, q = static_cast<std::size_t>(ny) * w + nx;
    if (is_foreground(labels[p]) == is_foreground(labels[q])) return;
    smooth += gamma * std::exp(-beta * sq_diff(px[p], px[q])) / kOffsetDist[o];
  });
  return data + smooth;
}

GrabCutResult grabcut(const ImageF& img, const BBox& box, const GrabCutOptions& opts) {
  opts.validate();
  if (img.channels() != 3) throw_invalid("grabcut expects an RGB image");
  const int w = img.width(), h = img.height();
  if (!box.valid_for(w, h)) throw_invalid("grabcut: bounding box outside the image");
  if (box.width() == w && box.height() == h) {
    throw_invalid("grabcut: bounding box must leave some background (it covers the whole image)");
  }

  const auto px = gather_pixels(img);
  const std::size_t n = px.size();
  std::vector<PixelLabel> labels(n, PixelLabel::HardBG);
  for (int y = box.y0; y < box.y1; ++y)
    for (int x = box.x0; x < box.x1; ++x) labels[static_cast<std::size_t>(y) * w + x] = PixelLabel::ProbFG;

  const double beta = grabcut_beta(img);
  // Smoothness weight per pixel and forward offset.
  std::vector<double> pair_weight(4 * n, 0.0);
  for_each_pair(w, h, [&](int x, int y, int nx, int ny, int o) {
    const std::size_t p = static_cast<std::size_t>(y) * w + x, q = static_cast<std::size_t>(ny) * w + nx;
    pair_weight[4 * p + o] = opts.gamma * std::exp(-beta * sq_diff(px[p], px[q])) / kOffsetDist[o];
  });

  // Initial component assignment by k-means on each side.
  std::vector<int> comps(n, 0);
  for (bool fg : {false, true}) {
    std::vector<Rgb> sel;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i) {
      if (is_foreground(labels[i]) != fg) continue;
      sel.push_back(px[i]);
      idx.push_back(i);
    }
    const auto a = gmm_init(sel, opts.components, 2 * opts.seed + (fg ? 1 : 0));
    for (std::size_t j = 0; j < idx.size(); ++j) comps[idx[j]] = a[j];
  }

  const int bw = box.width();
  auto node_of = [&](int x, int y) { return (y - box.y0) * bw + (x - box.x0); };
  const int nodes = bw * box.height();

  GrabCutResult result;
  GrabCutState& st = result.state;
  for (int it = 1; it <= opts.max_iters; ++it) {
    if (it > 1) {
      for (std::size_t i = 0; i < n; ++i) {
        comps[i] = (is_foreground(labels[i]) ? st.fg_gmm : st.bg_gmm).best_component(px[i]).component;
      }
    }
    st.fg_gmm = fit_label(px, labels, comps, true, opts);
    st.bg_gmm = fit_label(px, labels, comps, false, opts);

    // Source side = foreground. cost_fg goes on node->sink, cost_bg on source->node.
    std::vector<double> cost_fg(nodes), cost_bg(nodes);
    for (int y = box.y0; y < box.y1; ++y)
      for (int x = box.x0; x < box.x1; ++x) {
        const Rgb& z = px[static_cast<std::size_t>(y) * w + x];
        cost_fg[node_of(x, y)] = data_cost(st.fg_gmm, z);
        cost_bg[node_of(x, y)] = data_cost(st.bg_gmm, z);
      }

    FlowNetwork net(nodes);
    net.reserve(static_cast<std::size_t>(nodes), static_cast<std::size_t>(nodes) * 6);
    for_each_pair(w, h, [&](int x, int y, int nx, int ny, int o) {
      const bool in_p = box.contains(x, y), in_q = box.contains(nx, ny);
      if (!in_p && !in_q) return;
      const double v = pair_weight[4 * (static_cast<std::size_t>(y) * w + x) + o];
      if (!(v > 0)) return;
      if (in_p && in_q) {
        net.add_edge(node_of(x, y), node_of(nx, ny), v, v);
      } else if (in_p) {
        cost_fg[node_of(x, y)] += v;  // the outside neighbour is fixed background
      } else {
        cost_fg[node_of(nx, ny)] += v;
      }
    });
    for (int i = 0; i < nodes; ++i) {
      const double shift = std::min(cost_fg[i], cost_bg[i]);
      net.add_terminal(i, cost_bg[i] - shift, cost_fg[i] - shift);
    }

    const MaxFlowResult cut = max_flow(net);
    std::size_t fg_count = 0;
    for (int y = box.y0; y < box.y1; ++y)
      for (int x = box.x0; x < box.x1; ++x) {
        const bool fg = cut.source_side[node_of(x, y)] != 0;
        labels[static_cast<std::size_t>(y) * w + x] = fg ? PixelLabel::ProbFG : PixelLabel::ProbBG;
        fg_count += fg;
      }
    if (fg_count == 0) throw_degenerate("grabcut produced an empty foreground");

    const double energy = grabcut_energy(img, labels, st.fg_gmm, st.bg_gmm, opts.gamma, beta);
    result.energies.push_back(energy);
    st.iteration = it;
    const double prev = st.energy;
    st.energy = energy;
    if (it > 1) {
      const double scale = std::max(std::abs(prev), std::numeric_limits<double>::min());
      if ((prev - energy) / scale < opts.rel_tol) break;
    }
  }

  st.labels = labels;
  result.mask = BinaryMask(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) result.mask.set(x, y, is_foreground(labels[static_cast<std::size_t>(y) * w + x]));
  return result;
}

}  // namespace canpr

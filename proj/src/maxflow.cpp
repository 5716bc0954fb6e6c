#include "canpr/segmentation/maxflow.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "canpr/error.hpp"

namespace canpr {

FlowNetwork::FlowNetwork(int inner_nodes) : inner_(inner_nodes) {
  if (inner_nodes < 0) throw_invalid("FlowNetwork needs a non-negative node count");
  first_.assign(static_cast<std::size_t>(inner_nodes) + 2, -1);
}

void FlowNetwork::reserve(std::size_t nodes_hint, std::size_t edges_hint) {
  first_.reserve(nodes_hint + 2);
  next_.reserve(2 * edges_hint);
  head_.reserve(2 * edges_hint);
  capacity_.reserve(2 * edges_hint);
}

void FlowNetwork::add_edge(int u, int v, double cap, double rev_cap) {
  const int n = node_count();
  if (u < 0 || v < 0 || u >= n || v >= n || u == v) {
    throw_invalid("FlowNetwork::add_edge: bad endpoints " + std::to_string(u) + "->" + std::to_string(v));
  }
  if (!(cap >= 0) || !(rev_cap >= 0) || !std::isfinite(cap) || !std::isfinite(rev_cap)) {
    throw_invalid("FlowNetwork::add_edge: capacities must be finite and non-negative");
  }
  const int a = static_cast<int>(head_.size());
  head_.push_back(v);
  capacity_.push_back(cap);
  next_.push_back(first_[u]);
  first_[u] = a;
  head_.push_back(u);
  capacity_.push_back(rev_cap);
  next_.push_back(first_[v]);
  first_[v] = a + 1;
}

void FlowNetwork::add_terminal(int node, double from_source, double to_sink) {
  if (from_source > 0) add_edge(source(), node, from_source);
  if (to_sink > 0) add_edge(node, sink(), to_sink);
}

namespace {

enum Tree : std::uint8_t { kFree = 0, kSourceTree = 1, kSinkTree = 2 };

constexpr int kNoParent = -1;  // orphan, or a free node
constexpr int kRoot = -2;      // the terminal itself

// Boykov-Kolmogorov: two search trees grown from the terminals and reused
// across augmentations. Parent links are arcs: for a source-tree node the arc
// parent->node, for a sink-tree node the arc node->parent.
class BkSolver {
 public:
  explicit BkSolver(const FlowNetwork& net)
      : net_(net),
        cap_(net.arc_count()),
        tree_(net.node_count(), kFree),
        parent_(net.node_count(), kNoParent),
        ts_(net.node_count(), 0),
        dist_(net.node_count(), 0),
        active_(net.node_count(), 0) {
    for (std::size_t a = 0; a < cap_.size(); ++a) cap_[a] = net.arc_capacity(a);
  }

  std::vector<double> run() {
    const int s = net_.source(), t = net_.sink();
    tree_[s] = kSourceTree;
    tree_[t] = kSinkTree;
    parent_[s] = parent_[t] = kRoot;
    activate(s);
    activate(t);

    for (;;) {
      const int meet = grow();
      if (meet < 0) break;
      ++time_;
      ts_[s] = ts_[t] = time_;
      augment(meet);
      adopt();
    }
    return std::move(cap_);
  }

 private:
  int parent_node(int v) const {
    const int a = parent_[v];
    return tree_[v] == kSourceTree ? net_.arc_tail(a) : net_.arc_head(a);
  }

  bool is_terminal(int v) const { return v == net_.source() || v == net_.sink(); }

  void activate(int v) {
    if (!active_[v]) {
      active_[v] = 1;
      queue_.push_back(v);
    }
  }

  // Returns an arc u->v with u in the source tree, v in the sink tree and
  // positive residual, or -1 when the trees cannot grow any further.
  int grow() {
    while (!queue_.empty()) {
      const int p = queue_.front();
      if (tree_[p] == kFree) {
        queue_.pop_front();
        active_[p] = 0;
        continue;
      }
      const bool src = tree_[p] == kSourceTree;
      for (int a = net_.first_arc(p); a >= 0; a = net_.next_arc(a)) {
        const int q = net_.arc_head(a);
        const double residual = src ? cap_[a] : cap_[a ^ 1];
        if (residual <= 0) continue;
        if (tree_[q] == kFree) {
          tree_[q] = tree_[p];
          parent_[q] = src ? a : (a ^ 1);
          ts_[q] = ts_[p];
          dist_[q] = dist_[p] + 1;
          activate(q);
        } else if (tree_[q] != tree_[p]) {
          return src ? a : (a ^ 1);
        } else if (!is_terminal(q) && ts_[q] <= ts_[p] && dist_[q] > dist_[p]) {
          parent_[q] = src ? a : (a ^ 1);
          ts_[q] = ts_[p];
          dist_[q] = dist_[p] + 1;
        }
      }
      queue_.pop_front();
      active_[p] = 0;
    }
    return -1;
  }

  void augment(int meet) {
    const int s = net_.source(), t = net_.sink();
    double bottleneck = cap_[meet];
    for (int v = net_.arc_tail(meet); v != s; v = net_.arc_tail(parent_[v])) {
      bottleneck = std::min(bottleneck, cap_[parent_[v]]);
    }
    for (int v = net_.arc_head(meet); v != t; v = net_.arc_head(parent_[v])) {
      bottleneck = std::min(bottleneck, cap_[parent_[v]]);
    }

    push(meet, bottleneck);
    for (int v = net_.arc_tail(meet); v != s;) {
      const int a = parent_[v];
      const int up = net_.arc_tail(a);
      push(a, bottleneck);
      if (cap_[a] <= 0) make_orphan(v);
      v = up;
    }
    for (int v = net_.arc_head(meet); v != t;) {
      const int a = parent_[v];
      const int up = net_.arc_head(a);
      push(a, bottleneck);
      if (cap_[a] <= 0) make_orphan(v);
      v = up;
    }
  }

  void push(int a, double f) {
    cap_[a] -= f;
    cap_[a ^ 1] += f;
  }

  void make_orphan(int v) {
    parent_[v] = kNoParent;
    orphans_.push_back(v);
  }

  // Distance from v to its tree root, or -1 if the chain hits an orphan.
  // Nodes on a verified chain are stamped with the current time.
  int root_distance(int v) {
    int d = 0;
    for (int x = v;;) {
      if (parent_[x] == kRoot) break;
      if (ts_[x] == time_) {
        d += dist_[x];
        break;
      }
      if (parent_[x] == kNoParent) return -1;
      ++d;
      x = parent_node(x);
    }
    int label = d;
    for (int x = v; parent_[x] != kRoot && ts_[x] != time_; x = parent_node(x)) {
      ts_[x] = time_;
      dist_[x] = label--;
    }
    return d;
  }

  void adopt() {
    while (!orphans_.empty()) {
      const int p = orphans_.front();
      orphans_.pop_front();
      const bool src = tree_[p] == kSourceTree;

      int best_arc = kNoParent;
      int best_dist = std::numeric_limits<int>::max();
      for (int a = net_.first_arc(p); a >= 0; a = net_.next_arc(a)) {
        const int q = net_.arc_head(a);
        if (tree_[q] != tree_[p]) continue;
        // source tree: need q->p residual; sink tree: need p->q residual
        const double residual = src ? cap_[a ^ 1] : cap_[a];
        if (residual <= 0) continue;
        const int d = root_distance(q);
        if (d >= 0 && d < best_dist) {
          best_dist = d;
          best_arc = src ? (a ^ 1) : a;
        }
      }

      if (best_arc != kNoParent) {
        parent_[p] = best_arc;
        ts_[p] = time_;
        dist_[p] = best_dist + 1;
        continue;
      }

      for (int a = net_.first_arc(p); a >= 0; a = net_.next_arc(a)) {
        const int q = net_.arc_head(a);
        if (tree_[q] != tree_[p]) continue;
        const double residual = src ? cap_[a ^ 1] : cap_[a];
        if (residual > 0) activate(q);
        if (parent_[q] >= 0 && parent_node(q) == p) make_orphan(q);
      }
      tree_[p] = kFree;
    }
  }

  const FlowNetwork& net_;
  std::vector<double> cap_;
  std::vector<std::uint8_t> tree_;
  std::vector<int> parent_;
  std::vector<long> ts_;
  std::vector<int> dist_;
  std::vector<std::uint8_t> active_;
  std::deque<int> queue_;
  std::deque<int> orphans_;
  long time_ = 0;
};

}  // namespace

MaxFlowResult max_flow(const FlowNetwork& net) {
  MaxFlowResult result;
  result.residual = BkSolver(net).run();

  const int s = net.source();
  for (int a = net.first_arc(s); a >= 0; a = net.next_arc(a)) {
    result.flow += net.arc_capacity(a) - result.residual[a];
  }

  result.source_side.assign(net.node_count(), 0);
  std::vector<int> stack{s};
  result.source_side[s] = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int a = net.first_arc(u); a >= 0; a = net.next_arc(a)) {
      const int v = net.arc_head(a);
      if (!result.source_side[v] && result.residual[a] > 0) {
        result.source_side[v] = 1;
        stack.push_back(v);
      }
    }
  }
  return result;
}

}  // namespace canpr

#pragma once

#include <cstdint>
#include <vector>

namespace canpr {

/// Directed s-t network. Every arc is stored together with its reverse so
/// residual capacities live in place. Inner nodes are 0..n-1; the source is
/// n and the sink n+1.
class FlowNetwork {
 public:
  explicit FlowNetwork(int inner_nodes);

  int inner_nodes() const noexcept { return inner_; }
  int node_count() const noexcept { return inner_ + 2; }
  int source() const noexcept { return inner_; }
  int sink() const noexcept { return inner_ + 1; }
  std::size_t arc_count() const noexcept { return head_.size(); }

  /// Adds u->v with capacity `cap` and v->u with capacity `rev_cap`.
  void add_edge(int u, int v, double cap, double rev_cap = 0.0);
  /// Terminal arcs source->node and node->sink.
  void add_terminal(int node, double from_source, double to_sink);

  /// Outgoing arcs of a node form a list: first_arc(node), next_arc(arc), ... -1.
  int first_arc(int node) const { return first_[node]; }
  int next_arc(int arc) const { return next_[arc]; }
  int arc_head(std::size_t arc) const { return head_[arc]; }
  int arc_tail(std::size_t arc) const { return head_[arc ^ 1]; }
  double arc_capacity(std::size_t arc) const { return capacity_[arc]; }

  void reserve(std::size_t nodes_hint, std::size_t edges_hint);

 private:
  int inner_;
  std::vector<int> first_;     // per node: first outgoing arc or -1
  std::vector<int> next_;      // per arc: next outgoing arc of the same tail
  std::vector<int> head_;      // per arc: target node
  std::vector<double> capacity_;
};

struct MaxFlowResult {
  double flow = 0.0;
  /// 1 for nodes reachable from the source in the final residual graph.
  std::vector<std::uint8_t> source_side;
  /// Residual capacity of every arc after the solve.
  std::vector<double> residual;
};

/// Exact maximum flow (Boykov-Kolmogorov augmenting paths with tree reuse).
MaxFlowResult max_flow(const FlowNetwork& net);

}  // namespace canpr

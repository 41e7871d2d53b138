#ifndef PREFTRANSFER_MIN_COST_FLOW_H_
#define PREFTRANSFER_MIN_COST_FLOW_H_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

namespace preftransfer {

/// Successive shortest augmenting paths with Johnson potentials.
///
/// Arc costs are real and must be non-negative, so the initial potentials are
/// zero and Dijkstra stays valid after every augmentation. `Flow` is either an
/// integer type (exact, used with integer-scaled marginals) or double.
template <typename Flow>
class MinCostFlow {
 public:
  struct Result {
    Flow flow = 0;
    double cost = 0.0;
  };

  explicit MinCostFlow(std::size_t nodes) : graph_(nodes) {}

  std::size_t add_node() {
    graph_.emplace_back();
    return graph_.size() - 1;
  }

  /// Adds u -> v and returns an id usable with flow().
  std::size_t add_arc(std::size_t from, std::size_t to, Flow capacity, double cost) {
    if (cost < 0.0) throw std::invalid_argument("min-cost flow arc cost must be >= 0");
    if (capacity < 0) throw std::invalid_argument("min-cost flow arc capacity must be >= 0");
    const std::size_t id = arcs_.size();
    graph_[from].push_back(arcs_.size());
    arcs_.push_back({to, capacity, cost});
    graph_[to].push_back(arcs_.size());
    arcs_.push_back({from, 0, -cost});
    capacity_.push_back(capacity);
    return id / 2;
  }

  /// Pushes up to `demand` units from source to sink at minimum cost.
  Result solve(std::size_t source, std::size_t sink, Flow demand) {
    const std::size_t n = graph_.size();
    std::vector<double> potential(n, 0.0);
    std::vector<double> dist(n);
    std::vector<std::size_t> parent_arc(n);
    Result result;
    constexpr double kInf = std::numeric_limits<double>::infinity();
    using Entry = std::pair<double, std::size_t>;

    while (result.flow < demand && residual_left(demand - result.flow)) {
      std::fill(dist.begin(), dist.end(), kInf);
      dist[source] = 0.0;
      std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
      heap.emplace(0.0, source);
      while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (std::size_t a : graph_[u]) {
          const Arc& arc = arcs_[a];
          if (!positive(arc.residual)) continue;
          // Reduced costs are >= 0 up to round-off; clamp so Dijkstra stays valid.
          const double reduced = std::max(0.0, arc.cost + potential[u] - potential[arc.to]);
          const double nd = d + reduced;
          if (nd < dist[arc.to]) {
            dist[arc.to] = nd;
            parent_arc[arc.to] = a;
            heap.emplace(nd, arc.to);
          }
        }
      }
      if (dist[sink] == kInf) break;
      for (std::size_t v = 0; v < n; ++v) {
        if (dist[v] < kInf) potential[v] += dist[v];
      }
      Flow push = demand - result.flow;
      for (std::size_t v = sink; v != source; v = arcs_[parent_arc[v] ^ 1U].to) {
        push = std::min(push, arcs_[parent_arc[v]].residual);
      }
      for (std::size_t v = sink; v != source; v = arcs_[parent_arc[v] ^ 1U].to) {
        Arc& arc = arcs_[parent_arc[v]];
        arc.residual -= push;
        arcs_[parent_arc[v] ^ 1U].residual += push;
        result.cost += static_cast<double>(push) * arc.cost;
      }
      result.flow += push;
    }
    return result;
  }

  /// Flow currently carried by the arc returned from add_arc.
  Flow flow(std::size_t arc_id) const { return capacity_[arc_id] - arcs_[2 * arc_id].residual; }

 private:
  struct Arc {
    std::size_t to;
    Flow residual;
    double cost;
  };

  static bool positive(Flow value) {
    if constexpr (std::is_floating_point_v<Flow>) {
      return value > kFloatEpsilon;
    } else {
      return value > 0;
    }
  }
  static bool residual_left(Flow value) { return positive(value); }

  static constexpr double kFloatEpsilon = 1e-14;

  std::vector<std::vector<std::size_t>> graph_;
  std::vector<Arc> arcs_;
  std::vector<Flow> capacity_;
};

}  // namespace preftransfer

#endif  // PREFTRANSFER_MIN_COST_FLOW_H_

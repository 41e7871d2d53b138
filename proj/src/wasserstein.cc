#include "preftransfer/wasserstein.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "preftransfer/min_cost_flow.h"

namespace preftransfer {

namespace {

constexpr std::int64_t kScaleBudget = std::int64_t{1} << 40;

Eigen::MatrixXd euclidean_costs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument(
        fmt::format("cost matrix dimension mismatch: {} vs {}", a.cols(), b.cols()));
  }
  const Eigen::MatrixXd at = a.transpose();
  const Eigen::MatrixXd bt = b.transpose();
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, j) = (at.col(i) - bt.col(j)).norm();
  }
  return out;
}

// Transport from weighted candidates to the uniform source measure on an
// integer scale. `supply[j]` units leave candidate support[j]; each source
// point receives F/n. Returns the optimal cost divided by F.
template <typename Flow>
struct TransportNetwork {
  MinCostFlow<Flow> flow;
  std::size_t source_node;
  std::size_t sink_node;
  std::vector<std::size_t> supply_arcs;
  std::vector<std::vector<std::size_t>> route_arcs;

  TransportNetwork(const CostMatrix& costs, std::span<const std::size_t> support,
                   std::span<const Flow> supply, Flow per_source)
      : flow(support.size() + costs.source_count() + 2),
        source_node(support.size() + costs.source_count()),
        sink_node(source_node + 1) {
    const std::size_t n = costs.source_count();
    supply_arcs.reserve(support.size());
    route_arcs.resize(support.size());
    for (std::size_t a = 0; a < support.size(); ++a) {
      supply_arcs.push_back(flow.add_arc(source_node, a, supply[a], 0.0));
      route_arcs[a].reserve(n);
      const Flow route_cap = std::min(supply[a], per_source);
      for (std::size_t i = 0; i < n; ++i) {
        route_arcs[a].push_back(
            flow.add_arc(a, support.size() + i, route_cap, costs(support[a], i)));
      }
    }
    for (std::size_t i = 0; i < n; ++i) flow.add_arc(support.size() + i, sink_node, per_source, 0.0);
  }

  // Cost recomputed from arc flows (more accurate than the running sum).
  double routed_cost(const CostMatrix& costs, std::span<const std::size_t> support) const {
    double total = 0.0;
    for (std::size_t a = 0; a < support.size(); ++a) {
      for (std::size_t i = 0; i < route_arcs[a].size(); ++i) {
        const Flow f = flow.flow(route_arcs[a][i]);
        if (f != 0) total += static_cast<double>(f) * costs(support[a], i);
      }
    }
    return total;
  }
};

}  // namespace

CostMatrix::CostMatrix(const Eigen::MatrixXd& target_rows, const Eigen::MatrixXd& source_rows)
    : costs_(euclidean_costs(target_rows, source_rows)) {
  if (costs_.cols() < 1) throw std::invalid_argument("source set is empty");
}

CostMatrix::CostMatrix(const CandidatePool& pool, const PreferenceSet& source)
    : CostMatrix(pool.embeddings(), source.embeddings()) {}

std::int64_t flow_scale(std::int64_t k, std::int64_t n) {
  if (k < 1 || n < 1) throw std::invalid_argument("flow scale needs positive K and n");
  const std::int64_t f = std::lcm(k, n);
  if (f <= 0 || f > kScaleBudget) {
    throw std::overflow_error(
        fmt::format("lcm(K={}, n={}) exceeds the integer flow scale budget 2^40", k, n));
  }
  return f;
}

double w1_fixed(const Eigen::VectorXd& w, const CostMatrix& costs) {
  if (static_cast<std::size_t>(w.size()) != costs.candidate_count()) {
    throw std::invalid_argument("weight vector does not match the cost matrix");
  }
  const double total = w.sum();
  if (std::abs(total - 1.0) > 1e-9 || (w.array() < 0.0).any()) {
    throw std::invalid_argument(
        fmt::format("W1 marginals do not match: candidate mass {:.17g} vs 1", total));
  }
  std::vector<std::size_t> support;
  std::vector<double> supply;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (w[j] > 0.0) {
      support.push_back(static_cast<std::size_t>(j));
      supply.push_back(w[j] / total);
    }
  }
  const double per_source = 1.0 / static_cast<double>(costs.source_count());
  TransportNetwork<double> net(costs, support, supply, per_source);
  const auto result = net.flow.solve(net.source_node, net.sink_node, 1.0);
  if (result.flow < 1.0 - 1e-9) {
    throw std::runtime_error(fmt::format("W1 transport incomplete: routed {:.17g}", result.flow));
  }
  return net.routed_cost(costs, support);
}

double w1_fixed(const CappedWeights& w, const CostMatrix& costs) {
  return w1_fixed(w.values(), costs);
}

double w1_selection(std::span<const std::size_t> selection, const CostMatrix& costs) {
  if (selection.empty()) throw std::invalid_argument("W1 of an empty selection");
  for (std::size_t j : selection) {
    if (j >= costs.candidate_count()) throw std::invalid_argument("selection index out of range");
  }
  const auto s = static_cast<std::int64_t>(selection.size());
  const auto n = static_cast<std::int64_t>(costs.source_count());
  const std::int64_t f = flow_scale(s, n);
  std::vector<std::int64_t> supply(selection.size(), f / s);
  TransportNetwork<std::int64_t> net(costs, selection, supply, f / n);
  const auto result = net.flow.solve(net.source_node, net.sink_node, f);
  if (result.flow != f) throw std::logic_error("integer transport did not route all mass");
  return net.routed_cost(costs, selection) / static_cast<double>(f);
}

double w1_on_line(std::span<const double> a_points, std::span<const double> a_weights,
                  std::span<const double> b_points, std::span<const double> b_weights) {
  if (a_points.size() != a_weights.size() || b_points.size() != b_weights.size()) {
    throw std::invalid_argument("points and weights differ in length");
  }
  struct Event {
    double x;
    double delta;  // change of F_a - F_b at x
  };
  std::vector<Event> events;
  events.reserve(a_points.size() + b_points.size());
  for (std::size_t i = 0; i < a_points.size(); ++i) events.push_back({a_points[i], a_weights[i]});
  for (std::size_t i = 0; i < b_points.size(); ++i) events.push_back({b_points[i], -b_weights[i]});
  std::sort(events.begin(), events.end(), [](const Event& l, const Event& r) { return l.x < r.x; });
  double diff = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    diff += events[i].delta;
    total += std::abs(diff) * (events[i + 1].x - events[i].x);
  }
  return total;
}

JointLpSolution solve_joint_lp(const CostMatrix& costs, int k) {
  const std::size_t m2 = costs.candidate_count();
  if (k < 1 || static_cast<std::size_t>(k) > m2) {
    throw std::invalid_argument(fmt::format("joint LP needs 1 <= K <= {}, got {}", m2, k));
  }
  const auto n = static_cast<std::int64_t>(costs.source_count());
  const std::int64_t f = flow_scale(k, n);
  std::vector<std::size_t> all(m2);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::int64_t> supply(m2, f / k);
  TransportNetwork<std::int64_t> net(costs, all, supply, f / n);
  const auto result = net.flow.solve(net.source_node, net.sink_node, f);
  if (result.flow != f) throw std::logic_error("joint LP flow did not route all mass");

  const double scale = static_cast<double>(f);
  Eigen::VectorXd w(static_cast<Eigen::Index>(m2));
  Eigen::MatrixXd coupling(static_cast<Eigen::Index>(m2), n);
  for (std::size_t j = 0; j < m2; ++j) {
    w[static_cast<Eigen::Index>(j)] = static_cast<double>(net.flow.flow(net.supply_arcs[j])) / scale;
    for (std::int64_t i = 0; i < n; ++i) {
      coupling(static_cast<Eigen::Index>(j), i) =
          static_cast<double>(net.flow.flow(net.route_arcs[j][static_cast<std::size_t>(i)])) / scale;
    }
  }
  const double value = net.routed_cost(costs, all) / scale;
  return JointLpSolution{CappedWeights(std::move(w), k), value, f, std::move(coupling)};
}

JointLpSolution solve_joint_lp(const CandidatePool& pool, const PreferenceSet& source, int k) {
  return solve_joint_lp(CostMatrix(pool, source), k);
}

double LipschitzFunction::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return sign * (slopes * x + offsets).maxCoeff();
}

std::vector<LipschitzFunction> random_lipschitz_functions(Eigen::Index dim, std::size_t count,
                                                          std::size_t pieces, Rng& rng) {
  if (dim < 1 || pieces < 1) throw std::invalid_argument("need dim >= 1 and pieces >= 1");
  std::vector<LipschitzFunction> out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    LipschitzFunction f;
    f.slopes.resize(static_cast<Eigen::Index>(pieces), dim);
    f.offsets.resize(static_cast<Eigen::Index>(pieces));
    for (Eigen::Index p = 0; p < f.slopes.rows(); ++p) {
      Eigen::VectorXd dir(dim);
      for (Eigen::Index i = 0; i < dim; ++i) dir[i] = standard_normal(rng);
      const double norm = dir.norm();
      const double length = 1.0 - uniform01(rng);  // (0, 1]
      f.slopes.row(p) = (norm > 0.0 ? dir / norm * length : dir).transpose();
      f.offsets[p] = standard_normal(rng);
    }
    f.sign = (c % 2 == 0) ? 1.0 : -1.0;
    out.push_back(std::move(f));
  }
  return out;
}

double w1_dual_check(const Eigen::VectorXd& w, const Eigen::MatrixXd& target_rows,
                     const Eigen::MatrixXd& source_rows,
                     std::span<const LipschitzFunction> trials) {
  if (w.size() != target_rows.rows()) throw std::invalid_argument("weights/targets mismatch");
  double best = -std::numeric_limits<double>::infinity();
  const double inv_n = 1.0 / static_cast<double>(source_rows.rows());
  for (const LipschitzFunction& f : trials) {
    double value = 0.0;
    for (Eigen::Index j = 0; j < target_rows.rows(); ++j) {
      if (w[j] != 0.0) value += w[j] * f(target_rows.row(j).transpose());
    }
    for (Eigen::Index i = 0; i < source_rows.rows(); ++i) {
      value -= inv_n * f(source_rows.row(i).transpose());
    }
    best = std::max(best, value);
  }
  return best;
}

}  // namespace preftransfer

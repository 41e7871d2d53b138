#include "preftransfer/frank_wolfe.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace preftransfer {

std::vector<std::size_t> lmo_support(const Eigen::VectorXd& gradient, int k) {
  const auto n = static_cast<std::size_t>(gradient.size());
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw std::invalid_argument(fmt::format("LMO needs 1 <= K <= {}, got {}", n, k));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    const double ga = gradient[static_cast<Eigen::Index>(a)];
    const double gb = gradient[static_cast<Eigen::Index>(b)];
    return ga < gb || (ga == gb && a < b);
  };
  auto kth = order.begin() + k;
  std::nth_element(order.begin(), kth - 1, order.end(), less);
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

CappedWeights lmo_capped_simplex(const Eigen::VectorXd& gradient, int k) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(gradient.size());
  for (std::size_t j : lmo_support(gradient, k)) s[static_cast<Eigen::Index>(j)] = 1.0 / k;
  return CappedWeights(std::move(s), k);
}

FwResult frank_wolfe(const KernelMatrices& mats, int k, int iterations) {
  if (iterations < 1) throw std::invalid_argument("Frank-Wolfe needs L >= 1");
  const Eigen::MatrixXd& tt = mats.tt();
  const Eigen::VectorXd& affinity = mats.source_affinity();
  const double c = mats.ss_const();

  CappedWeights start = uniform_capped_weights(mats.candidate_count(), k);
  Eigen::VectorXd w = start.values();
  // K^TT w is carried along: the vertex s has K nonzeros, so K^TT s costs
  // O(K * 2m) instead of a full matrix-vector product.
  Eigen::VectorXd tw = tt * w;
  Eigen::VectorXd ts(w.size());

  auto objective = [&] { return clamp_mmd_squared(w.dot(tw) - 2.0 * affinity.dot(w) + c); };

  FwTrace trace;
  trace.iterations = iterations;
  trace.objective.reserve(static_cast<std::size_t>(iterations) + 1);
  trace.best_objective.reserve(static_cast<std::size_t>(iterations) + 1);
  trace.gap.reserve(static_cast<std::size_t>(iterations) + 1);

  double f = objective();
  trace.objective.push_back(f);
  trace.best_objective.push_back(f);
  Eigen::VectorXd best_w = w;
  double best_f = f;
  double lower = 0.0;

  const double inv_k = 1.0 / k;
  for (int t = 0; t <= iterations; ++t) {
    const Eigen::VectorXd grad = 2.0 * tw - 2.0 * affinity;
    const std::vector<std::size_t> support = lmo_support(grad, k);
    double grad_dot_s = 0.0;
    for (std::size_t j : support) grad_dot_s += grad[static_cast<Eigen::Index>(j)];
    grad_dot_s *= inv_k;
    const double gap = grad.dot(w) - grad_dot_s;
    trace.gap.push_back(gap);
    lower = std::max(lower, f - gap);
    // The last pass only evaluates the duality gap of the final iterate.
    if (t == iterations) break;

    const double gamma = 2.0 / (t + 2.0);
    ts.setZero();
    for (std::size_t j : support) ts += tt.col(static_cast<Eigen::Index>(j));
    ts *= inv_k;
    w *= (1.0 - gamma);
    for (std::size_t j : support) w[static_cast<Eigen::Index>(j)] += gamma * inv_k;
    tw = (1.0 - gamma) * tw + gamma * ts;
    if (!CappedWeights::feasible(w, k)) {
      throw std::logic_error(fmt::format("Frank-Wolfe iterate {} left the capped simplex", t + 1));
    }

    f = objective();
    trace.objective.push_back(f);
    if (f < best_f) {
      best_f = f;
      best_w = w;
    }
    trace.best_objective.push_back(best_f);
  }
  trace.final_gap = trace.gap.back();
  trace.lower_bound = lower;

  return FwResult{CappedWeights(std::move(best_w), k), CappedWeights(std::move(w), k),
                  std::move(trace)};
}

double continuous_opt_value(const KernelMatrices& mats, int k, int iterations) {
  return std::sqrt(std::max(0.0, frank_wolfe(mats, k, iterations).best_objective()));
}

}  // namespace preftransfer

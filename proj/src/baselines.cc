#include "preftransfer/baselines.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "preftransfer/random.h"

namespace preftransfer {

namespace {

void check_k(int k, std::size_t limit, bool exclusive) {
  if (k < 1 || static_cast<std::size_t>(k) > limit) {
    throw std::invalid_argument(fmt::format("baseline K={} not in [1, {}]{}", k, limit,
                                            exclusive ? " (exclusive labels)" : ""));
  }
}

}  // namespace

Selection random_select(std::size_t candidate_count, int k, std::uint64_t seed,
                        bool exclusive_labels) {
  Rng rng(seed);
  if (!exclusive_labels) {
    check_k(k, candidate_count, false);
    return Selection(sample_without_replacement(rng, candidate_count, static_cast<std::size_t>(k)),
                     candidate_count, k);
  }
  const std::size_t items = candidate_count / 2;
  check_k(k, items, true);
  std::vector<std::size_t> picked =
      sample_without_replacement(rng, items, static_cast<std::size_t>(k));
  for (std::size_t& item : picked) item = 2 * item + (uniform01(rng) < 0.5 ? 0 : 1);
  return Selection(std::move(picked), candidate_count, k);
}

Selection random_select(const CandidatePool& pool, int k, std::uint64_t seed,
                        bool exclusive_labels) {
  return random_select(pool.size(), k, seed, exclusive_labels);
}

Eigen::VectorXd nearest_source_distance(const Eigen::MatrixXd& target_rows,
                                        const Eigen::MatrixXd& source_rows) {
  if (target_rows.cols() != source_rows.cols()) {
    throw std::invalid_argument("target/source dimension mismatch");
  }
  if (source_rows.rows() < 1) throw std::invalid_argument("source set is empty");
  const Eigen::MatrixXd tt = target_rows.transpose();
  const Eigen::MatrixXd st = source_rows.transpose();
  Eigen::VectorXd out(target_rows.rows());
  for (Eigen::Index j = 0; j < tt.cols(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < st.cols(); ++i) {
      best = std::min(best, (tt.col(j) - st.col(i)).squaredNorm());
    }
    out[j] = std::sqrt(best);
  }
  return out;
}

Selection greedy_nearest(const Eigen::MatrixXd& target_rows, const Eigen::MatrixXd& source_rows,
                         int k, bool exclusive_labels) {
  const auto count = static_cast<std::size_t>(target_rows.rows());
  check_k(k, exclusive_labels ? count / 2 : count, exclusive_labels);
  const Eigen::VectorXd dist = nearest_source_distance(target_rows, source_rows);
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dist[static_cast<Eigen::Index>(a)] < dist[static_cast<Eigen::Index>(b)];
  });
  std::vector<char> taken(count, 0);
  std::vector<std::size_t> chosen;
  chosen.reserve(static_cast<std::size_t>(k));
  for (std::size_t j : order) {
    if (chosen.size() == static_cast<std::size_t>(k)) break;
    if (exclusive_labels && taken[CandidatePool::sibling(j)]) continue;
    taken[j] = 1;
    chosen.push_back(j);
  }
  return Selection(std::move(chosen), count, k);
}

Selection greedy_nearest(const CandidatePool& pool, const PreferenceSet& source, int k,
                         bool exclusive_labels) {
  return greedy_nearest(pool.embeddings(), source.embeddings(), k, exclusive_labels);
}

}  // namespace preftransfer

#include "preftransfer/pipeline.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace preftransfer {

TransferResult transfer_mmd(const KernelMatrices& mats, const RunConfig& config) {
  config.validate(mats.candidate_count());
  FwResult fw = frank_wolfe(mats, config.k, config.fw_iterations);
  MmdObjective objective(mats);
  RoundingOutcome outcome = round_repeat_best(fw.best, config.k, config.rounding_repeats,
                                              objective, config.seed, config.exclusive_labels);
  const double value = std::sqrt(std::max(0.0, fw.best_objective()));
  const double lower = std::sqrt(std::max(0.0, fw.trace.lower_bound));
  return TransferResult{Metric::kMmd,        value, std::min(lower, value), std::move(fw.best),
                        std::move(outcome), std::move(fw.trace)};
}

TransferResult transfer_w1(const CostMatrix& costs, const Eigen::MatrixXd& target_rows,
                           const Eigen::MatrixXd& source_rows, const RunConfig& config) {
  config.validate(costs.candidate_count());
  JointLpSolution lp = solve_joint_lp(costs, config.k);
  W1Objective objective(costs, target_rows, source_rows);
  RoundingOutcome outcome = round_repeat_best(lp.weights, config.k, config.rounding_repeats,
                                              objective, config.seed, config.exclusive_labels);
  return TransferResult{Metric::kW1, lp.value, lp.value, std::move(lp.weights),
                        std::move(outcome), std::nullopt};
}

TransferResult transfer(const CandidatePool& pool, const PreferenceSet& source,
                        const RunConfig& config) {
  if (pool.dim() != source.dim()) {
    throw std::invalid_argument("pool and source embeddings differ in dimension");
  }
  if (config.metric == Metric::kMmd) {
    const KernelSpec spec{config.sigma, 1.0};
    return transfer_mmd(build_matrices(pool, source, spec), config);
  }
  const CostMatrix costs(pool, source);
  return transfer_w1(costs, pool.embeddings(), source.embeddings(), config);
}

SweepResult sweep_k(const CandidatePool& pool, const PreferenceSet& source,
                    const RunConfig& config, std::span<const int> ks) {
  if (ks.empty()) throw std::invalid_argument("K sweep needs at least one K");
  SweepResult out;
  std::optional<KernelMatrices> mats;
  std::optional<CostMatrix> costs;
  if (config.metric == Metric::kMmd) {
    mats.emplace(build_matrices(pool, source, KernelSpec{config.sigma, 1.0}));
  } else {
    costs.emplace(pool, source);
  }
  for (int k : ks) {
    RunConfig run = config;
    run.k = k;
    out.ks.push_back(k);
    out.results.push_back(mats ? transfer_mmd(*mats, run)
                               : transfer_w1(*costs, pool.embeddings(), source.embeddings(), run));
    if (out.results.back().outcome.distance < out.results[out.best].outcome.distance) {
      out.best = out.results.size() - 1;
    }
  }
  return out;
}

}  // namespace preftransfer

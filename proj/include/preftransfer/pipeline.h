#ifndef PREFTRANSFER_PIPELINE_H_
#define PREFTRANSFER_PIPELINE_H_

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "preftransfer/core.h"
#include "preftransfer/frank_wolfe.h"
#include "preftransfer/kernels.h"
#include "preftransfer/rounding.h"
#include "preftransfer/wasserstein.h"

namespace preftransfer {

/// Relaxation, randomized rounding and repair for one source/pool pair.
struct TransferResult {
  Metric metric;
  // MMD: sqrt of the best Frank-Wolfe objective (an upper estimate of the
  // relaxed optimum). W1: the exact joint LP value.
  double continuous_value;
  // MMD: sqrt of the duality-gap certificate. W1: equal to continuous_value.
  double continuous_lower_bound;
  CappedWeights weights;
  RoundingOutcome outcome;
  std::optional<FwTrace> trace;
};

TransferResult transfer_mmd(const KernelMatrices& mats, const RunConfig& config);
TransferResult transfer_w1(const CostMatrix& costs, const Eigen::MatrixXd& target_rows,
                           const Eigen::MatrixXd& source_rows, const RunConfig& config);
/// Dispatches on config.metric; builds the kernel or cost matrices itself.
TransferResult transfer(const CandidatePool& pool, const PreferenceSet& source,
                        const RunConfig& config);

struct SweepResult {
  std::vector<int> ks;
  std::vector<TransferResult> results;
  std::size_t best = 0;  // index with the smallest achieved distance
};

/// Runs the pipeline for every K' in `ks` and keeps the best, since the
/// combinatorial optimum is not monotone in K.
SweepResult sweep_k(const CandidatePool& pool, const PreferenceSet& source,
                    const RunConfig& config, std::span<const int> ks);

}  // namespace preftransfer

#endif  // PREFTRANSFER_PIPELINE_H_

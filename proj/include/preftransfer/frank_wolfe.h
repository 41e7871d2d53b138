#ifndef PREFTRANSFER_FRANK_WOLFE_H_
#define PREFTRANSFER_FRANK_WOLFE_H_

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "preftransfer/core.h"
#include "preftransfer/kernels.h"

namespace preftransfer {

/// Per-iteration record of a Frank-Wolfe run on the MMD^2 objective.
///
/// `objective[t]` is MMD^2 at the t-th iterate (t = 0 is the uniform start),
/// so it holds L + 1 values. The fixed 2/(t+2) schedule is not monotone;
/// `best_objective` is the running minimum.
struct FwTrace {
  std::vector<double> objective;
  std::vector<double> best_objective;
  std::vector<double> gap;
  double final_gap = 0.0;
  // max_t (f(w_t) - gap_t): a certified lower bound on the continuous optimum.
  double lower_bound = 0.0;
  int iterations = 0;
};

struct FwResult {
  CappedWeights best;
  CappedWeights last;
  FwTrace trace;

  double best_objective() const { return trace.best_objective.back(); }
};

/// Indices of the K smallest gradient entries, ties to the lower index.
std::vector<std::size_t> lmo_support(const Eigen::VectorXd& gradient, int k);

/// Exact linear minimization over the capped simplex: 1/K on lmo_support.
CappedWeights lmo_capped_simplex(const Eigen::VectorXd& gradient, int k);

/// Frank-Wolfe with step 2/(t+2), t = 0..L-1, from w0 = 1/(2m).
/// Returns the best iterate seen together with the last one.
FwResult frank_wolfe(const KernelMatrices& mats, int k, int iterations);

/// sqrt of the best MMD^2 reached by frank_wolfe, clamped at 0.
double continuous_opt_value(const KernelMatrices& mats, int k, int iterations);

}  // namespace preftransfer

#endif  // PREFTRANSFER_FRANK_WOLFE_H_

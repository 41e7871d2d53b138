#ifndef PREFTRANSFER_WASSERSTEIN_H_
#define PREFTRANSFER_WASSERSTEIN_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "preftransfer/core.h"
#include "preftransfer/random.h"

namespace preftransfer {

/// Euclidean ground costs between candidates (rows) and source points (columns).
class CostMatrix {
 public:
  CostMatrix(const Eigen::MatrixXd& target_rows, const Eigen::MatrixXd& source_rows);
  CostMatrix(const CandidatePool& pool, const PreferenceSet& source);

  const Eigen::MatrixXd& costs() const { return costs_; }
  double operator()(std::size_t candidate, std::size_t source) const {
    return costs_(static_cast<Eigen::Index>(candidate), static_cast<Eigen::Index>(source));
  }
  std::size_t candidate_count() const { return static_cast<std::size_t>(costs_.rows()); }
  std::size_t source_count() const { return static_cast<std::size_t>(costs_.cols()); }

 private:
  Eigen::MatrixXd costs_;
};

/// Common denominator F for candidate capacities 1/K and source masses 1/n.
/// Throws std::overflow_error if lcm(K, n) exceeds the scale budget (2^40).
std::int64_t flow_scale(std::int64_t k, std::int64_t n);

/// Exact W1 between sum_j w_j delta(z_j) and the uniform source measure
/// (real-valued marginals). Throws if sum(w) differs from 1 by more than 1e-9.
double w1_fixed(const Eigen::VectorXd& w, const CostMatrix& costs);
double w1_fixed(const CappedWeights& w, const CostMatrix& costs);

/// Exact W1 for the uniform measure on `selection`, on integer-scaled marginals.
double w1_selection(std::span<const std::size_t> selection, const CostMatrix& costs);

/// Closed-form W1 on the real line: integral of |F_a - F_b|.
double w1_on_line(std::span<const double> a_points, std::span<const double> a_weights,
                  std::span<const double> b_points, std::span<const double> b_weights);

struct JointLpSolution {
  CappedWeights weights;
  double value;
  std::int64_t scale;
  // Optimal coupling gamma (2m x n).
  Eigen::MatrixXd coupling;
};

/// min over capped-simplex w of W1(mu^w, mu_S): a capacitated min-cost flow with
/// candidate supply F/K and source demand F/n. The optimal w are multiples of 1/F.
JointLpSolution solve_joint_lp(const CostMatrix& costs, int k);
JointLpSolution solve_joint_lp(const CandidatePool& pool, const PreferenceSet& source, int k);

/// A 1-Lipschitz test function f(x) = sign * max_i (a_i . x + b_i) with |a_i| <= 1.
struct LipschitzFunction {
  Eigen::MatrixXd slopes;  // pieces x d
  Eigen::VectorXd offsets;
  double sign = 1.0;

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Random max-of-affine functions with slope norms in (0, 1]; half are negated.
std::vector<LipschitzFunction> random_lipschitz_functions(Eigen::Index dim, std::size_t count,
                                                          std::size_t pieces, Rng& rng);

/// max over trials of sum_j w_j f(z_j) - (1/n) sum_i f(x'_i); a lower bound on W1.
double w1_dual_check(const Eigen::VectorXd& w, const Eigen::MatrixXd& target_rows,
                     const Eigen::MatrixXd& source_rows,
                     std::span<const LipschitzFunction> trials);

}  // namespace preftransfer

#endif  // PREFTRANSFER_WASSERSTEIN_H_

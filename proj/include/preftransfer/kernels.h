#ifndef PREFTRANSFER_KERNELS_H_
#define PREFTRANSFER_KERNELS_H_

#include <cstddef>
#include <memory>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "preftransfer/core.h"

namespace preftransfer {

/// Gaussian kernel k(x, x') = exp(-|x - x'|^2 / (2 sigma^2)), bounded by B = 1.
struct KernelSpec {
  double bandwidth = 1.0;
  double bound = 1.0;

  void validate() const;
  std::string convention() const;
};

double gauss_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y, const KernelSpec& spec);

/// Dense kernel matrix between the rows of `a` and the rows of `b`.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const KernelSpec& spec);
/// Symmetric kernel matrix of the rows of `a` (computed on one triangle).
Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& a, const KernelSpec& spec);

/// Everything the MMD objective needs for one (pool, source) pair.
///
/// The target-target block only depends on the pool, so it is shared between
/// users of the same split. K^SS is never stored; only (1/n^2) 1'K^SS 1 is.
class KernelMatrices {
 public:
  KernelMatrices(std::shared_ptr<const Eigen::MatrixXd> target_target,
                 Eigen::MatrixXd source_target, double source_const, KernelSpec spec);

  const Eigen::MatrixXd& tt() const { return *target_target_; }
  std::shared_ptr<const Eigen::MatrixXd> shared_tt() const { return target_target_; }
  /// K^ST stored as 2m x n (candidate rows, source columns).
  const Eigen::MatrixXd& st() const { return source_target_; }
  /// (1/n) K^ST 1: mean similarity of each candidate to the source set.
  const Eigen::VectorXd& source_affinity() const { return source_affinity_; }
  double ss_const() const { return source_const_; }
  std::size_t candidate_count() const { return static_cast<std::size_t>(source_target_.rows()); }
  std::size_t source_count() const { return static_cast<std::size_t>(source_target_.cols()); }
  const KernelSpec& spec() const { return spec_; }

 private:
  std::shared_ptr<const Eigen::MatrixXd> target_target_;
  Eigen::MatrixXd source_target_;
  Eigen::VectorXd source_affinity_;
  double source_const_;
  KernelSpec spec_;
};

/// (1/n^2) sum_{i,i'} k(x'_i, x'_i') without materializing K^SS.
double source_self_similarity(const Eigen::MatrixXd& source_rows, const KernelSpec& spec);

KernelMatrices build_matrices(const Eigen::MatrixXd& target_rows,
                              const Eigen::MatrixXd& source_rows, const KernelSpec& spec);
KernelMatrices build_matrices(std::shared_ptr<const Eigen::MatrixXd> target_gram,
                              const Eigen::MatrixXd& target_rows,
                              const Eigen::MatrixXd& source_rows, const KernelSpec& spec);
KernelMatrices build_matrices(const CandidatePool& pool, const PreferenceSet& source,
                              const KernelSpec& spec);

/// Full MMD^2 between sum_j w_j delta(z_j) and the source measure. `w` need not
/// be on the simplex (rounded weights are not); tiny negatives are clamped.
double mmd_squared(const Eigen::VectorXd& w, const KernelMatrices& mats);
double mmd_squared(const CappedWeights& w, const KernelMatrices& mats);
double mmd(const Eigen::VectorXd& w, const KernelMatrices& mats);

/// Gradient of w'K^TT w - (2/n) 1'K^ST w, i.e. 2 K^TT w - (2/n) K^ST 1.
Eigen::VectorXd mmd_gradient(const Eigen::VectorXd& w, const KernelMatrices& mats);
Eigen::VectorXd mmd_gradient(const CappedWeights& w, const KernelMatrices& mats);

/// MMD of the uniform measure on the selected candidates.
double selection_mmd(std::span<const std::size_t> selection, const KernelMatrices& mats);

/// RKHS norm of sum_j (a_j - b_j) phi(z_j) given the Gram matrix of the z_j.
double rkhs_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                     const Eigen::MatrixXd& gram);

/// Clamp for MMD^2 round-off: values in [-1e-10, 0) map to 0.
double clamp_mmd_squared(double value);

}  // namespace preftransfer

#endif  // PREFTRANSFER_KERNELS_H_

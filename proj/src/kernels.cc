#include "preftransfer/kernels.h"

#include <cmath>
#include <stdexcept>
#include <utility>

#include <fmt/format.h>

namespace preftransfer {

namespace {

void check_same_dim(Eigen::Index a, Eigen::Index b) {
  if (a != b) {
    throw std::invalid_argument(fmt::format("dimension mismatch: {} vs {}", a, b));
  }
}

}  // namespace

void KernelSpec::validate() const {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw std::invalid_argument("kernel bandwidth must be positive and finite");
  }
  if (!(bound > 0.0)) throw std::invalid_argument("kernel bound must be positive");
}

std::string KernelSpec::convention() const {
  return fmt::format("gaussian exp(-|x-y|^2/(2*sigma^2)), sigma={}, B={}", bandwidth, bound);
}

double gauss_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y, const KernelSpec& spec) {
  check_same_dim(x.size(), y.size());
  const double sq = (x - y).squaredNorm();
  return std::exp(-sq / (2.0 * spec.bandwidth * spec.bandwidth));
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const KernelSpec& spec) {
  spec.validate();
  check_same_dim(a.cols(), b.cols());
  const double scale = -1.0 / (2.0 * spec.bandwidth * spec.bandwidth);
  // Column access is contiguous; rows of a column-major matrix are strided.
  const Eigen::MatrixXd at = a.transpose();
  const Eigen::MatrixXd bt = b.transpose();
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out(i, j) = std::exp(scale * (at.col(i) - bt.col(j)).squaredNorm());
    }
  }
  return out;
}

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& a, const KernelSpec& spec) {
  spec.validate();
  const double scale = -1.0 / (2.0 * spec.bandwidth * spec.bandwidth);
  const Eigen::MatrixXd at = a.transpose();
  Eigen::MatrixXd out(a.rows(), a.rows());
  for (Eigen::Index j = 0; j < a.rows(); ++j) {
    out(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < a.rows(); ++i) {
      const double v = std::exp(scale * (at.col(i) - at.col(j)).squaredNorm());
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

KernelMatrices::KernelMatrices(std::shared_ptr<const Eigen::MatrixXd> target_target,
                               Eigen::MatrixXd source_target, double source_const,
                               KernelSpec spec)
    : target_target_(std::move(target_target)),
      source_target_(std::move(source_target)),
      source_const_(source_const),
      spec_(spec) {
  if (!target_target_) throw std::invalid_argument("missing target kernel matrix");
  const Eigen::Index m2 = source_target_.rows();
  if (target_target_->rows() != m2 || target_target_->cols() != m2) {
    throw std::invalid_argument(fmt::format("K^TT is {}x{}, expected {}x{}",
                                            target_target_->rows(), target_target_->cols(), m2,
                                            m2));
  }
  if (source_target_.cols() < 1) throw std::invalid_argument("source set is empty");
  source_affinity_ = source_target_.rowwise().mean();
}

double source_self_similarity(const Eigen::MatrixXd& source_rows, const KernelSpec& spec) {
  spec.validate();
  const Eigen::Index n = source_rows.rows();
  if (n < 1) throw std::invalid_argument("source set is empty");
  const double scale = -1.0 / (2.0 * spec.bandwidth * spec.bandwidth);
  const Eigen::MatrixXd st = source_rows.transpose();
  double off = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      off += std::exp(scale * (st.col(i) - st.col(j)).squaredNorm());
    }
  }
  const double nn = static_cast<double>(n);
  return (nn + 2.0 * off) / (nn * nn);
}

KernelMatrices build_matrices(std::shared_ptr<const Eigen::MatrixXd> target_gram,
                              const Eigen::MatrixXd& target_rows,
                              const Eigen::MatrixXd& source_rows, const KernelSpec& spec) {
  check_same_dim(target_rows.cols(), source_rows.cols());
  return KernelMatrices(std::move(target_gram), kernel_matrix(target_rows, source_rows, spec),
                        source_self_similarity(source_rows, spec), spec);
}

KernelMatrices build_matrices(const Eigen::MatrixXd& target_rows,
                              const Eigen::MatrixXd& source_rows, const KernelSpec& spec) {
  check_same_dim(target_rows.cols(), source_rows.cols());
  auto tt = std::make_shared<const Eigen::MatrixXd>(gram_matrix(target_rows, spec));
  return build_matrices(std::move(tt), target_rows, source_rows, spec);
}

KernelMatrices build_matrices(const CandidatePool& pool, const PreferenceSet& source,
                              const KernelSpec& spec) {
  return build_matrices(pool.embeddings(), source.embeddings(), spec);
}

double clamp_mmd_squared(double value) {
  if (value >= 0.0) return value;
  if (value >= -1e-10) return 0.0;
  throw std::logic_error(
      fmt::format("MMD^2 = {:.3e} is negative beyond round-off; kernel not PSD?", value));
}

double mmd_squared(const Eigen::VectorXd& w, const KernelMatrices& mats) {
  check_same_dim(w.size(), static_cast<Eigen::Index>(mats.candidate_count()));
  const double quad = w.dot(mats.tt() * w);
  return clamp_mmd_squared(quad - 2.0 * mats.source_affinity().dot(w) + mats.ss_const());
}

double mmd_squared(const CappedWeights& w, const KernelMatrices& mats) {
  return mmd_squared(w.values(), mats);
}

double mmd(const Eigen::VectorXd& w, const KernelMatrices& mats) {
  return std::sqrt(mmd_squared(w, mats));
}

Eigen::VectorXd mmd_gradient(const Eigen::VectorXd& w, const KernelMatrices& mats) {
  check_same_dim(w.size(), static_cast<Eigen::Index>(mats.candidate_count()));
  return 2.0 * (mats.tt() * w) - 2.0 * mats.source_affinity();
}

Eigen::VectorXd mmd_gradient(const CappedWeights& w, const KernelMatrices& mats) {
  return mmd_gradient(w.values(), mats);
}

double selection_mmd(std::span<const std::size_t> selection, const KernelMatrices& mats) {
  if (selection.empty()) throw std::invalid_argument("MMD of an empty selection");
  const Eigen::MatrixXd& tt = mats.tt();
  double quad = 0.0;
  double cross = 0.0;
  for (std::size_t a : selection) {
    const auto ia = static_cast<Eigen::Index>(a);
    cross += mats.source_affinity()[ia];
    for (std::size_t b : selection) quad += tt(ia, static_cast<Eigen::Index>(b));
  }
  const double s = static_cast<double>(selection.size());
  return std::sqrt(clamp_mmd_squared(quad / (s * s) - 2.0 * cross / s + mats.ss_const()));
}

double rkhs_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                     const Eigen::MatrixXd& gram) {
  const Eigen::VectorXd diff = a - b;
  return std::sqrt(clamp_mmd_squared(diff.dot(gram * diff)));
}

}  // namespace preftransfer

#include "preftransfer/pca.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <fmt/format.h>

namespace preftransfer {

namespace {

// Eigenvalues at or below this fraction of the largest are treated as zero.
constexpr double kNullRatio = 1e-12;

void normalize_signs(Eigen::MatrixXd& components) {
  for (Eigen::Index c = 0; c < components.cols(); ++c) {
    Eigen::Index arg = 0;
    components.col(c).cwiseAbs().maxCoeff(&arg);
    if (components(arg, c) < 0.0) components.col(c) *= -1.0;
  }
}

}  // namespace

PcaModel fit_pca(const Eigen::MatrixXd& samples, Eigen::Index k) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  if (k < 1) throw std::invalid_argument("PCA needs at least one component");
  if (k > d) {
    throw std::invalid_argument(fmt::format("PCA asked for {} components of {}-d data", k, d));
  }
  if (n < 2) throw std::invalid_argument("PCA needs at least two samples");

  PcaModel model;
  model.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - model.mean.transpose();
  const double denom = static_cast<double>(n - 1);

  Eigen::VectorXd values(k);
  Eigen::MatrixXd vectors(d, k);
  if (n >= d) {
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw std::runtime_error("covariance eigensolver failed");
    for (Eigen::Index c = 0; c < k; ++c) {
      values[c] = solver.eigenvalues()[d - 1 - c];
      vectors.col(c) = solver.eigenvectors().col(d - 1 - c);
    }
  } else {
    // Fewer samples than dimensions: diagonalize the n x n Gram matrix and map
    // its eigenvectors back; directions beyond its rank are completed by QR.
    const Eigen::MatrixXd gram = (centered * centered.transpose()) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) throw std::runtime_error("Gram eigensolver failed");
    const double top = std::max(solver.eigenvalues()[n - 1], 0.0);
    Eigen::Index rank = 0;
    for (Eigen::Index c = 0; c < std::min(k, n); ++c) {
      const double lambda = solver.eigenvalues()[n - 1 - c];
      if (lambda <= kNullRatio * top || lambda <= 0.0) break;
      values[c] = lambda;
      vectors.col(c) = centered.transpose() * solver.eigenvectors().col(n - 1 - c) /
                       std::sqrt(denom * lambda);
      ++rank;
    }
    if (rank < k) {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(vectors.leftCols(rank));
      const Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
      for (Eigen::Index c = rank; c < k; ++c) {
        values[c] = 0.0;
        vectors.col(c) = basis.col(c);
      }
    }
  }

  normalize_signs(vectors);
  model.components = std::move(vectors);
  model.eigenvalues = values;
  model.scale.resize(k);
  const double top = std::max(values[0], 0.0);
  Eigen::Index nulls = 0;
  for (Eigen::Index c = 0; c < k; ++c) {
    if (values[c] <= kNullRatio * top || values[c] <= 0.0) {
      model.scale[c] = 0.0;
      ++nulls;
    } else {
      model.scale[c] = 1.0 / std::sqrt(values[c]);
    }
  }
  if (nulls > 0) {
    model.warnings.push_back(
        fmt::format("{} of {} principal components have zero variance and are scaled by 0",
                    nulls, k));
  }
  return model;
}

Eigen::MatrixXd apply_pca(const PcaModel& model, const Eigen::MatrixXd& samples) {
  if (samples.cols() != model.input_dim()) {
    throw std::invalid_argument(fmt::format("PCA model expects {}-d input, got {}",
                                            model.input_dim(), samples.cols()));
  }
  Eigen::MatrixXd projected = (samples.rowwise() - model.mean.transpose()) * model.components;
  return projected * model.scale.asDiagonal();
}

}  // namespace preftransfer

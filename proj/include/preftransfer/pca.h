#ifndef PREFTRANSFER_PCA_H_
#define PREFTRANSFER_PCA_H_

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace preftransfer {

struct PcaModel {
  Eigen::VectorXd mean;        // d_raw
  Eigen::MatrixXd components;  // d_raw x k, orthonormal columns
  Eigen::VectorXd eigenvalues; // k, descending (sample covariance, N-1)
  Eigen::VectorXd scale;       // k; 1/sqrt(eigenvalue), or 0 for a null direction
  std::vector<std::string> warnings;

  Eigen::Index input_dim() const { return mean.size(); }
  Eigen::Index output_dim() const { return components.cols(); }
};

/// Principal components of the rows of `samples` (N x d_raw). Each column is
/// sign-normalized so its largest-magnitude entry is positive.
PcaModel fit_pca(const Eigen::MatrixXd& samples, Eigen::Index k = 50);

/// (samples - mean) * components, scaled to unit variance per component.
Eigen::MatrixXd apply_pca(const PcaModel& model, const Eigen::MatrixXd& samples);

}  // namespace preftransfer

#endif  // PREFTRANSFER_PCA_H_

#ifndef PREFTRANSFER_BASELINES_H_
#define PREFTRANSFER_BASELINES_H_

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

#include "preftransfer/core.h"

namespace preftransfer {

/// K candidates uniformly without replacement. With `exclusive_labels`, K
/// distinct items are drawn instead and each gets a uniformly random label.
Selection random_select(std::size_t candidate_count, int k, std::uint64_t seed,
                        bool exclusive_labels = false);
Selection random_select(const CandidatePool& pool, int k, std::uint64_t seed,
                        bool exclusive_labels = false);

/// Distance of every target row to its nearest source row.
Eigen::VectorXd nearest_source_distance(const Eigen::MatrixXd& target_rows,
                                        const Eigen::MatrixXd& source_rows);

/// The K candidates closest to the source set (label-augmented embeddings),
/// ties to the lower index. With `exclusive_labels` a candidate is skipped if
/// its sibling label was already taken.
Selection greedy_nearest(const Eigen::MatrixXd& target_rows, const Eigen::MatrixXd& source_rows,
                         int k, bool exclusive_labels = false);
Selection greedy_nearest(const CandidatePool& pool, const PreferenceSet& source, int k,
                         bool exclusive_labels = false);

}  // namespace preftransfer

#endif  // PREFTRANSFER_BASELINES_H_

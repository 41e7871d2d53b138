#ifndef PREFTRANSFER_CORE_H_
#define PREFTRANSFER_CORE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace preftransfer {

/// Scale C of the label coordinate appended to every feature vector.
inline constexpr double kDefaultLabelScale = 10.0;

enum class Label : std::uint8_t { kDown = 0, kUp = 1 };

inline int label_value(Label label) { return label == Label::kUp ? 1 : 0; }
Label label_from_int(int value);

/// An item with a thumbs-up/down label. The embedding is the feature vector
/// with C * label appended, which is the point the distances see.
class LabeledPoint {
 public:
  LabeledPoint(std::string item_id, Eigen::VectorXd features, Label label,
               double label_scale = kDefaultLabelScale);

  const std::string& item_id() const { return item_id_; }
  const Eigen::VectorXd& features() const { return features_; }
  Label label() const { return label_; }
  const Eigen::VectorXd& embedding() const { return embedding_; }
  Eigen::Index raw_dim() const { return features_.size(); }
  Eigen::Index dim() const { return embedding_.size(); }

 private:
  std::string item_id_;
  Eigen::VectorXd features_;
  Label label_;
  Eigen::VectorXd embedding_;
};

struct Item {
  std::string id;
  Eigen::VectorXd features;
};

/// The source preferences D_S. Embeddings are cached row-wise (n x d).
class PreferenceSet {
 public:
  explicit PreferenceSet(std::vector<LabeledPoint> points);

  const std::vector<LabeledPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  Eigen::Index dim() const { return embeddings_.cols(); }
  const Eigen::MatrixXd& embeddings() const { return embeddings_; }

 private:
  std::vector<LabeledPoint> points_;
  Eigen::MatrixXd embeddings_;
};

/// Target items doubled into 2m labeled candidates. Candidate 2j is item j
/// with label up, candidate 2j+1 is item j with label down.
class CandidatePool {
 public:
  const std::vector<Item>& items() const { return items_; }
  const std::vector<LabeledPoint>& candidates() const { return candidates_; }
  std::size_t size() const { return candidates_.size(); }
  std::size_t item_count() const { return items_.size(); }
  Eigen::Index dim() const { return embeddings_.cols(); }
  const Eigen::MatrixXd& embeddings() const { return embeddings_; }
  double label_scale() const { return label_scale_; }

  static std::size_t sibling(std::size_t candidate) { return candidate ^ 1U; }
  static std::size_t item_index(std::size_t candidate) { return candidate / 2; }
  static Label label_of(std::size_t candidate) {
    return candidate % 2 == 0 ? Label::kUp : Label::kDown;
  }

 private:
  friend CandidatePool build_candidate_pool(std::vector<Item> items, double label_scale);

  std::vector<Item> items_;
  std::vector<LabeledPoint> candidates_;
  Eigen::MatrixXd embeddings_;
  double label_scale_ = kDefaultLabelScale;
};

CandidatePool build_candidate_pool(std::vector<Item> items,
                                   double label_scale = kDefaultLabelScale);

/// A point of the capped simplex {w : sum w = 1, 0 <= w_j <= 1/K}.
class CappedWeights {
 public:
  static constexpr double kSumTolerance = 1e-9;
  static constexpr double kBoxTolerance = 1e-12;

  /// Throws std::invalid_argument when `values` is outside the capped simplex.
  CappedWeights(Eigen::VectorXd values, int cap_k);

  static bool feasible(const Eigen::VectorXd& values, int cap_k);

  const Eigen::VectorXd& values() const { return values_; }
  int cap() const { return cap_k_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t j) const { return values_[static_cast<Eigen::Index>(j)]; }

 private:
  Eigen::VectorXd values_;
  int cap_k_;
};

CappedWeights uniform_capped_weights(std::size_t candidate_count, int k);
CappedWeights uniform_capped_weights(const CandidatePool& pool, int k);

/// A set of distinct candidate indices, kept sorted.
class Selection {
 public:
  Selection(std::vector<std::size_t> indices, std::size_t candidate_count, int target);

  const std::vector<std::size_t>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  int target() const { return target_; }
  std::size_t candidate_count() const { return candidate_count_; }
  bool contains(std::size_t candidate) const;
  bool complete() const { return indices_.size() == static_cast<std::size_t>(target_); }

  /// Uniform empirical weights 1/|S| on the selected candidates.
  Eigen::VectorXd weights() const;

 private:
  std::vector<std::size_t> indices_;
  std::size_t candidate_count_;
  int target_;
};

/// Uniform weights 1/|indices| over `indices` in a vector of length `candidate_count`.
Eigen::VectorXd uniform_weights_on(std::span<const std::size_t> indices,
                                   std::size_t candidate_count);

enum class Metric { kMmd, kW1 };

const char* metric_name(Metric metric);
Metric parse_metric(const std::string& text);

struct RunConfig {
  int k = 100;
  int fw_iterations = 1000;
  int rounding_repeats = 100;
  std::uint64_t seed = 0;
  Metric metric = Metric::kMmd;
  double sigma = 1.0;
  double label_scale = kDefaultLabelScale;
  // At most one of the two labels of an item may be selected.
  bool exclusive_labels = false;

  void validate(std::size_t candidate_count) const;
};

}  // namespace preftransfer

#endif  // PREFTRANSFER_CORE_H_

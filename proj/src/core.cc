#include "preftransfer/core.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include <fmt/format.h>

namespace preftransfer {

Label label_from_int(int value) {
  if (value == 0) return Label::kDown;
  if (value == 1) return Label::kUp;
  throw std::invalid_argument(fmt::format("label must be 0 or 1, got {}", value));
}

LabeledPoint::LabeledPoint(std::string item_id, Eigen::VectorXd features, Label label,
                           double label_scale)
    : item_id_(std::move(item_id)), features_(std::move(features)), label_(label) {
  if (features_.size() < 1) {
    throw std::invalid_argument("labeled point needs at least one feature");
  }
  if (!std::isfinite(label_scale) || label_scale < 0.0) {
    throw std::invalid_argument("label scale must be finite and non-negative");
  }
  embedding_.resize(features_.size() + 1);
  embedding_.head(features_.size()) = features_;
  embedding_[features_.size()] = label_scale * label_value(label_);
}

PreferenceSet::PreferenceSet(std::vector<LabeledPoint> points) : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("preference set is empty");
  const Eigen::Index d = points_.front().dim();
  embeddings_.resize(static_cast<Eigen::Index>(points_.size()), d);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (points_[i].dim() != d) {
      throw std::invalid_argument(fmt::format(
          "preference {} has embedding dimension {}, expected {}", i, points_[i].dim(), d));
    }
    embeddings_.row(static_cast<Eigen::Index>(i)) = points_[i].embedding().transpose();
  }
}

CandidatePool build_candidate_pool(std::vector<Item> items, double label_scale) {
  if (items.empty()) throw std::invalid_argument("candidate pool needs at least one item");
  const Eigen::Index d_raw = items.front().features.size();
  for (const Item& item : items) {
    if (item.features.size() != d_raw) {
      throw std::invalid_argument(fmt::format("item '{}' has {} features, expected {}", item.id,
                                              item.features.size(), d_raw));
    }
  }
  CandidatePool pool;
  pool.label_scale_ = label_scale;
  pool.candidates_.reserve(2 * items.size());
  for (const Item& item : items) {
    pool.candidates_.emplace_back(item.id, item.features, Label::kUp, label_scale);
    pool.candidates_.emplace_back(item.id, item.features, Label::kDown, label_scale);
  }
  pool.embeddings_.resize(static_cast<Eigen::Index>(pool.candidates_.size()), d_raw + 1);
  for (std::size_t j = 0; j < pool.candidates_.size(); ++j) {
    pool.embeddings_.row(static_cast<Eigen::Index>(j)) =
        pool.candidates_[j].embedding().transpose();
  }
  pool.items_ = std::move(items);
  return pool;
}

CappedWeights::CappedWeights(Eigen::VectorXd values, int cap_k)
    : values_(std::move(values)), cap_k_(cap_k) {
  if (cap_k_ < 1) throw std::invalid_argument("weight cap K must be positive");
  if (!feasible(values_, cap_k_)) {
    throw std::invalid_argument(
        fmt::format("weights are outside the capped simplex (sum={:.17g}, min={:.17g}, "
                    "max={:.17g}, cap=1/{})",
                    values_.sum(), values_.size() ? values_.minCoeff() : 0.0,
                    values_.size() ? values_.maxCoeff() : 0.0, cap_k_));
  }
}

bool CappedWeights::feasible(const Eigen::VectorXd& values, int cap_k) {
  if (cap_k < 1 || values.size() == 0) return false;
  if (!values.allFinite()) return false;
  if (std::abs(values.sum() - 1.0) > kSumTolerance) return false;
  const double cap = 1.0 / cap_k + kBoxTolerance;
  return values.minCoeff() >= 0.0 && values.maxCoeff() <= cap;
}

CappedWeights uniform_capped_weights(std::size_t candidate_count, int k) {
  if (k < 1) throw std::invalid_argument("K must be positive");
  if (static_cast<std::size_t>(k) > candidate_count) {
    throw std::invalid_argument(
        fmt::format("K={} exceeds the {} available candidates", k, candidate_count));
  }
  const auto n = static_cast<Eigen::Index>(candidate_count);
  return CappedWeights(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)), k);
}

CappedWeights uniform_capped_weights(const CandidatePool& pool, int k) {
  return uniform_capped_weights(pool.size(), k);
}

Selection::Selection(std::vector<std::size_t> indices, std::size_t candidate_count, int target)
    : indices_(std::move(indices)), candidate_count_(candidate_count), target_(target) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw std::invalid_argument("selection contains a duplicate candidate");
  }
  if (!indices_.empty() && indices_.back() >= candidate_count_) {
    throw std::invalid_argument(fmt::format("selection index {} out of range [0, {})",
                                            indices_.back(), candidate_count_));
  }
}

bool Selection::contains(std::size_t candidate) const {
  return std::binary_search(indices_.begin(), indices_.end(), candidate);
}

Eigen::VectorXd Selection::weights() const {
  return uniform_weights_on(indices_, candidate_count_);
}

Eigen::VectorXd uniform_weights_on(std::span<const std::size_t> indices,
                                   std::size_t candidate_count) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(candidate_count));
  if (indices.empty()) return w;
  const double share = 1.0 / static_cast<double>(indices.size());
  for (std::size_t j : indices) w[static_cast<Eigen::Index>(j)] += share;
  return w;
}

const char* metric_name(Metric metric) { return metric == Metric::kMmd ? "mmd" : "w1"; }

Metric parse_metric(const std::string& text) {
  if (text == "mmd") return Metric::kMmd;
  if (text == "w1") return Metric::kW1;
  throw std::invalid_argument(fmt::format("unknown metric '{}' (expected mmd or w1)", text));
}

void RunConfig::validate(std::size_t candidate_count) const {
  if (k < 1) throw std::invalid_argument("K must be >= 1");
  if (fw_iterations < 1) throw std::invalid_argument("L must be >= 1");
  if (rounding_repeats < 1) throw std::invalid_argument("R must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  const std::size_t limit = exclusive_labels ? candidate_count / 2 : candidate_count;
  if (static_cast<std::size_t>(k) > limit) {
    throw std::invalid_argument(fmt::format("K={} exceeds the {} selectable candidates{}", k,
                                            limit, exclusive_labels ? " (exclusive labels)" : ""));
  }
}

}  // namespace preftransfer

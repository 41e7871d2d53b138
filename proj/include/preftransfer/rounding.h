#ifndef PREFTRANSFER_ROUNDING_H_
#define PREFTRANSFER_ROUNDING_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "preftransfer/core.h"
#include "preftransfer/kernels.h"
#include "preftransfer/wasserstein.h"

namespace preftransfer {

/// Distance from the uniform measure on a candidate subset to the source measure.
///
/// Greedy repair needs to score many one-element changes of the same set, so
/// objectives hand out a State that answers "what if j were added/removed".
class SelectionObjective {
 public:
  class State {
   public:
    virtual ~State() = default;
    virtual double distance_with(std::size_t candidate) const = 0;
    virtual double distance_without(std::size_t candidate) const = 0;
    virtual void insert(std::size_t candidate) = 0;
    virtual void erase(std::size_t candidate) = 0;
  };

  virtual ~SelectionObjective() = default;
  virtual std::size_t candidate_count() const = 0;
  virtual double distance(std::span<const std::size_t> selection) const = 0;
  virtual std::unique_ptr<State> start(std::span<const std::size_t> selection) const = 0;
};

/// MMD with rank-one updates of the quadratic form: O(2m) per committed step,
/// O(1) per scored candidate.
class MmdObjective final : public SelectionObjective {
 public:
  explicit MmdObjective(const KernelMatrices& mats) : mats_(mats) {}

  std::size_t candidate_count() const override { return mats_.candidate_count(); }
  double distance(std::span<const std::size_t> selection) const override;
  std::unique_ptr<State> start(std::span<const std::size_t> selection) const override;

 private:
  const KernelMatrices& mats_;
};

/// Exact W1; every query is a fresh transport solve (closed form when d = 1).
class W1Objective final : public SelectionObjective {
 public:
  /// `target_rows`/`source_rows` are only used for the one-dimensional fast path.
  W1Objective(const CostMatrix& costs, const Eigen::MatrixXd& target_rows,
              const Eigen::MatrixXd& source_rows);

  std::size_t candidate_count() const override { return costs_.candidate_count(); }
  double distance(std::span<const std::size_t> selection) const override;
  std::unique_ptr<State> start(std::span<const std::size_t> selection) const override;

 private:
  const CostMatrix& costs_;
  std::vector<double> target_line_;
  std::vector<double> source_line_;
  bool on_line_ = false;
};

/// I_j ~ Bernoulli(K w_j) independently; returns {j : I_j = 1}, sorted.
///
/// With `exclusive_labels`, the two labels of an item are drawn jointly: up
/// with probability p_up, down with p_down, neither otherwise. When
/// p_up + p_down > 1 the pair is renormalized and exactly one label is drawn.
/// Throws std::invalid_argument if some K*w_j > 1 + 1e-9.
std::vector<std::size_t> bernoulli_round(const Eigen::VectorXd& w, int k, std::uint64_t seed,
                                         bool exclusive_labels = false);
std::vector<std::size_t> bernoulli_round(const CappedWeights& w, std::uint64_t seed,
                                         bool exclusive_labels = false);

/// Greedy insertion/removal until |set| = K. Each step takes the legal move
/// with the smallest resulting distance, ties to the lowest index.
Selection greedy_repair(std::vector<std::size_t> set, int k, const SelectionObjective& objective,
                        bool exclusive_labels = false);

struct RoundingOutcome {
  Selection selection;
  std::size_t pre_repair_count;
  double distance;
  std::uint64_t trial_seed;
};

RoundingOutcome round_once(const CappedWeights& w, int k, const SelectionObjective& objective,
                           std::uint64_t trial_seed, bool exclusive_labels = false);

/// All R trials with seeds seed+1 .. seed+R, in order.
std::vector<RoundingOutcome> round_trials(const CappedWeights& w, int k, int repeats,
                                          const SelectionObjective& objective,
                                          std::uint64_t seed, bool exclusive_labels = false);

/// Best of R trials (first minimum on ties).
RoundingOutcome round_repeat_best(const CappedWeights& w, int k, int repeats,
                                  const SelectionObjective& objective, std::uint64_t seed,
                                  bool exclusive_labels = false);

}  // namespace preftransfer

#endif  // PREFTRANSFER_ROUNDING_H_

#include "preftransfer/rounding.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include <fmt/format.h>

#include "preftransfer/random.h"

namespace preftransfer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class MmdState final : public SelectionObjective::State {
 public:
  MmdState(const KernelMatrices& mats, std::span<const std::size_t> selection)
      : mats_(mats), column_sums_(Eigen::VectorXd::Zero(mats.tt().rows())) {
    for (std::size_t j : selection) insert(j);
  }

  double distance_with(std::size_t j) const override {
    const auto i = static_cast<Eigen::Index>(j);
    return evaluate(quad_ + 2.0 * column_sums_[i] + mats_.tt()(i, i),
                    cross_ + mats_.source_affinity()[i], size_ + 1);
  }

  double distance_without(std::size_t j) const override {
    if (size_ <= 1) return kInf;
    const auto i = static_cast<Eigen::Index>(j);
    return evaluate(quad_ - 2.0 * column_sums_[i] + mats_.tt()(i, i),
                    cross_ - mats_.source_affinity()[i], size_ - 1);
  }

  void insert(std::size_t j) override {
    const auto i = static_cast<Eigen::Index>(j);
    quad_ += 2.0 * column_sums_[i] + mats_.tt()(i, i);
    cross_ += mats_.source_affinity()[i];
    column_sums_ += mats_.tt().col(i);
    ++size_;
  }

  void erase(std::size_t j) override {
    const auto i = static_cast<Eigen::Index>(j);
    column_sums_ -= mats_.tt().col(i);
    quad_ -= 2.0 * column_sums_[i] + mats_.tt()(i, i);
    cross_ -= mats_.source_affinity()[i];
    --size_;
  }

 private:
  double evaluate(double quad, double cross, std::size_t size) const {
    const double s = static_cast<double>(size);
    return std::sqrt(std::max(0.0, quad / (s * s) - 2.0 * cross / s + mats_.ss_const()));
  }

  const KernelMatrices& mats_;
  // sum_{a in S} K^TT(a, j) for every candidate j.
  Eigen::VectorXd column_sums_;
  double quad_ = 0.0;
  double cross_ = 0.0;
  std::size_t size_ = 0;
};

class RecomputeState final : public SelectionObjective::State {
 public:
  RecomputeState(const SelectionObjective& objective, std::span<const std::size_t> selection)
      : objective_(objective), members_(selection.begin(), selection.end()) {}

  double distance_with(std::size_t j) const override {
    scratch_ = members_;
    scratch_.push_back(j);
    return objective_.distance(scratch_);
  }

  double distance_without(std::size_t j) const override {
    if (members_.size() <= 1) return kInf;
    scratch_.clear();
    for (std::size_t a : members_) {
      if (a != j) scratch_.push_back(a);
    }
    return objective_.distance(scratch_);
  }

  void insert(std::size_t j) override { members_.push_back(j); }
  void erase(std::size_t j) override { std::erase(members_, j); }

 private:
  const SelectionObjective& objective_;
  std::vector<std::size_t> members_;
  mutable std::vector<std::size_t> scratch_;
};

}  // namespace

double MmdObjective::distance(std::span<const std::size_t> selection) const {
  return selection_mmd(selection, mats_);
}

std::unique_ptr<SelectionObjective::State> MmdObjective::start(
    std::span<const std::size_t> selection) const {
  return std::make_unique<MmdState>(mats_, selection);
}

W1Objective::W1Objective(const CostMatrix& costs, const Eigen::MatrixXd& target_rows,
                         const Eigen::MatrixXd& source_rows)
    : costs_(costs) {
  if (target_rows.cols() == 1 && source_rows.cols() == 1 &&
      static_cast<std::size_t>(target_rows.rows()) == costs.candidate_count() &&
      static_cast<std::size_t>(source_rows.rows()) == costs.source_count()) {
    on_line_ = true;
    target_line_.assign(target_rows.data(), target_rows.data() + target_rows.rows());
    source_line_.assign(source_rows.data(), source_rows.data() + source_rows.rows());
  }
}

double W1Objective::distance(std::span<const std::size_t> selection) const {
  if (!on_line_) return w1_selection(selection, costs_);
  if (selection.empty()) throw std::invalid_argument("W1 of an empty selection");
  std::vector<double> points;
  points.reserve(selection.size());
  for (std::size_t j : selection) points.push_back(target_line_.at(j));
  const std::vector<double> a_w(points.size(), 1.0 / static_cast<double>(points.size()));
  const std::vector<double> b_w(source_line_.size(),
                                1.0 / static_cast<double>(source_line_.size()));
  return w1_on_line(points, a_w, source_line_, b_w);
}

std::unique_ptr<SelectionObjective::State> W1Objective::start(
    std::span<const std::size_t> selection) const {
  return std::make_unique<RecomputeState>(*this, selection);
}

std::vector<std::size_t> bernoulli_round(const Eigen::VectorXd& w, int k, std::uint64_t seed,
                                         bool exclusive_labels) {
  if (k < 1) throw std::invalid_argument("K must be positive");
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    const double p = k * w[j];
    if (!(p >= 0.0) || p > 1.0 + 1e-9) {
      throw std::invalid_argument(
          fmt::format("K*w[{}] = {:.17g} is not a probability; w is infeasible", j, p));
    }
  }
  Rng rng(seed);
  std::vector<std::size_t> chosen;
  if (!exclusive_labels) {
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      if (uniform01(rng) < k * w[j]) chosen.push_back(static_cast<std::size_t>(j));
    }
    return chosen;
  }
  if (w.size() % 2 != 0) throw std::invalid_argument("exclusive labels need paired candidates");
  for (Eigen::Index up = 0; up < w.size(); up += 2) {
    const double p_up = std::min(1.0, k * w[up]);
    const double p_down = std::min(1.0, k * w[up + 1]);
    const double u = uniform01(rng);
    const double total = p_up + p_down;
    if (total <= 1.0) {
      if (u < p_up) {
        chosen.push_back(static_cast<std::size_t>(up));
      } else if (u < total) {
        chosen.push_back(static_cast<std::size_t>(up + 1));
      }
    } else {
      chosen.push_back(static_cast<std::size_t>(u < p_up / total ? up : up + 1));
    }
  }
  return chosen;
}

std::vector<std::size_t> bernoulli_round(const CappedWeights& w, std::uint64_t seed,
                                         bool exclusive_labels) {
  return bernoulli_round(w.values(), w.cap(), seed, exclusive_labels);
}

Selection greedy_repair(std::vector<std::size_t> set, int k, const SelectionObjective& objective,
                        bool exclusive_labels) {
  const std::size_t count = objective.candidate_count();
  const std::size_t limit = exclusive_labels ? count / 2 : count;
  if (k < 1 || static_cast<std::size_t>(k) > limit) {
    throw std::invalid_argument(
        fmt::format("repair target K={} not in [1, {}]{}", k, limit,
                    exclusive_labels ? " (exclusive labels)" : ""));
  }
  std::vector<char> member(count, 0);
  for (std::size_t j : set) {
    if (j >= count) throw std::invalid_argument("repair input index out of range");
    if (member[j]) throw std::invalid_argument("repair input has a duplicate index");
    member[j] = 1;
  }
  const auto target = static_cast<std::size_t>(k);
  std::size_t size = set.size();
  auto state = objective.start(set);

  while (size < target) {
    std::size_t best = count;
    double best_distance = kInf;
    for (std::size_t j = 0; j < count; ++j) {
      if (member[j]) continue;
      if (exclusive_labels && member[CandidatePool::sibling(j)]) continue;
      const double d = state->distance_with(j);
      if (d < best_distance || best == count) {
        best = j;
        best_distance = d;
      }
    }
    if (best == count) throw std::runtime_error("no legal candidate left to insert");
    state->insert(best);
    member[best] = 1;
    ++size;
  }
  while (size > target) {
    std::size_t best = count;
    double best_distance = kInf;
    for (std::size_t j = 0; j < count; ++j) {
      if (!member[j]) continue;
      const double d = state->distance_without(j);
      if (d < best_distance || best == count) {
        best = j;
        best_distance = d;
      }
    }
    state->erase(best);
    member[best] = 0;
    --size;
  }
  std::vector<std::size_t> indices;
  indices.reserve(target);
  for (std::size_t j = 0; j < count; ++j) {
    if (member[j]) indices.push_back(j);
  }
  return Selection(std::move(indices), count, k);
}

RoundingOutcome round_once(const CappedWeights& w, int k, const SelectionObjective& objective,
                           std::uint64_t trial_seed, bool exclusive_labels) {
  std::vector<std::size_t> drawn = bernoulli_round(w.values(), k, trial_seed, exclusive_labels);
  const std::size_t pre = drawn.size();
  Selection selection = greedy_repair(std::move(drawn), k, objective, exclusive_labels);
  const double distance = objective.distance(selection.indices());
  return RoundingOutcome{std::move(selection), pre, distance, trial_seed};
}

std::vector<RoundingOutcome> round_trials(const CappedWeights& w, int k, int repeats,
                                          const SelectionObjective& objective,
                                          std::uint64_t seed, bool exclusive_labels) {
  if (repeats < 1) throw std::invalid_argument("R must be >= 1");
  std::vector<RoundingOutcome> out;
  out.reserve(static_cast<std::size_t>(repeats));
  for (int r = 1; r <= repeats; ++r) {
    out.push_back(round_once(w, k, objective, seed + static_cast<std::uint64_t>(r),
                             exclusive_labels));
  }
  return out;
}

RoundingOutcome round_repeat_best(const CappedWeights& w, int k, int repeats,
                                  const SelectionObjective& objective, std::uint64_t seed,
                                  bool exclusive_labels) {
  std::vector<RoundingOutcome> trials =
      round_trials(w, k, repeats, objective, seed, exclusive_labels);
  std::size_t best = 0;
  for (std::size_t t = 1; t < trials.size(); ++t) {
    if (trials[t].distance < trials[best].distance) best = t;
  }
  return std::move(trials[best]);
}

}  // namespace preftransfer

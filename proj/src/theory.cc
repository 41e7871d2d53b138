#include "preftransfer/theory.h"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>

#include "preftransfer/frank_wolfe.h"
#include "preftransfer/kernels.h"
#include "preftransfer/random.h"

namespace preftransfer {

namespace {

// Candidates in `after` but not `before`, and the reverse; both inputs sorted.
void set_difference_both(const std::vector<std::size_t>& before,
                         const std::vector<std::size_t>& after, std::vector<std::size_t>& added,
                         std::vector<std::size_t>& removed) {
  added.clear();
  removed.clear();
  std::set_difference(after.begin(), after.end(), before.begin(), before.end(),
                      std::back_inserter(added));
  std::set_difference(before.begin(), before.end(), after.begin(), after.end(),
                      std::back_inserter(removed));
}

double block_sum(const Eigen::MatrixXd& gram, const std::vector<std::size_t>& a,
                 const std::vector<std::size_t>& b) {
  double sum = 0.0;
  for (std::size_t i : a) {
    for (std::size_t j : b) {
      sum += gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return sum;
}

}  // namespace

CountMoments rounding_count_moments(const CappedWeights& w, int trials, std::uint64_t seed,
                                    bool exclusive_labels) {
  if (trials < 2) throw std::invalid_argument("count moments need at least two trials");
  double sum = 0.0, sum_sq = 0.0;
  for (int t = 1; t <= trials; ++t) {
    const auto count = static_cast<double>(
        bernoulli_round(w, seed + static_cast<std::uint64_t>(t), exclusive_labels).size());
    sum += count;
    sum_sq += count * count;
  }
  const double n = trials;
  const double mean = sum / n;
  return {mean, (sum_sq - n * mean * mean) / (n - 1.0), trials};
}

double upper_quantile(std::vector<double> samples, double delta) {
  if (samples.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  const auto n = samples.size();
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - delta) * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   samples.end());
  return samples[rank - 1];
}

double rkhs_rounding_bound(double kernel_bound, double delta, int k) {
  return std::sqrt(kernel_bound / (delta * k));
}

double lipschitz_rounding_bound(double dim, double delta, int k) {
  const double log_term = std::log(1.0 / delta);
  return std::sqrt(dim / (2.0 * k) * log_term) + std::sqrt(dim) / (3.0 * k) * log_term;
}

RkhsPerturbations rkhs_perturbations(const Eigen::MatrixXd& gram, const CappedWeights& w,
                                     const SelectionObjective& repair_objective, int trials,
                                     std::uint64_t seed) {
  const int k = w.cap();
  const double inv_k = 1.0 / k;
  const Eigen::VectorXd gw = gram * w.values();
  const double wgw = w.values().dot(gw);
  RkhsPerturbations out;
  out.rounding.reserve(static_cast<std::size_t>(trials));
  out.repair.reserve(static_cast<std::size_t>(trials));
  std::vector<std::size_t> added, removed;
  for (int t = 1; t <= trials; ++t) {
    const std::vector<std::size_t> drawn = bernoulli_round(w, seed + static_cast<std::uint64_t>(t));
    double cross = 0.0;
    for (std::size_t j : drawn) cross += gw[static_cast<Eigen::Index>(j)];
    const double rounding_sq =
        inv_k * inv_k * block_sum(gram, drawn, drawn) - 2.0 * inv_k * cross + wgw;
    out.rounding.push_back(std::sqrt(std::max(0.0, rounding_sq)));

    const Selection repaired = greedy_repair(drawn, k, repair_objective);
    set_difference_both(drawn, repaired.indices(), added, removed);
    const double repair_sq = inv_k * inv_k *
                             (block_sum(gram, added, added) - 2.0 * block_sum(gram, added, removed) +
                              block_sum(gram, removed, removed));
    out.repair.push_back(std::sqrt(std::max(0.0, repair_sq)));
  }
  return out;
}

LipschitzDeviations lipschitz_deviations(const Eigen::MatrixXd& target_rows,
                                         const CappedWeights& w,
                                         const SelectionObjective& repair_objective,
                                         std::span<const LipschitzFunction> functions, int trials,
                                         std::uint64_t seed) {
  const auto count = static_cast<Eigen::Index>(functions.size());
  Eigen::MatrixXd values(target_rows.rows(), count);
  for (Eigen::Index f = 0; f < count; ++f) {
    for (Eigen::Index j = 0; j < target_rows.rows(); ++j) {
      values(j, f) = functions[static_cast<std::size_t>(f)](target_rows.row(j).transpose());
    }
  }
  const Eigen::RowVectorXd expected = w.values().transpose() * values;
  const double inv_k = 1.0 / w.cap();
  LipschitzDeviations out{Eigen::MatrixXd(trials, count), Eigen::MatrixXd(trials, count)};
  std::vector<std::size_t> added, removed;
  for (int t = 0; t < trials; ++t) {
    const std::vector<std::size_t> drawn =
        bernoulli_round(w, seed + static_cast<std::uint64_t>(t) + 1);
    Eigen::RowVectorXd drawn_sum = Eigen::RowVectorXd::Zero(count);
    for (std::size_t j : drawn) drawn_sum += values.row(static_cast<Eigen::Index>(j));
    out.rounding.row(t) = inv_k * drawn_sum - expected;

    const Selection repaired = greedy_repair(drawn, w.cap(), repair_objective);
    set_difference_both(drawn, repaired.indices(), added, removed);
    Eigen::RowVectorXd change = Eigen::RowVectorXd::Zero(count);
    for (std::size_t j : added) change += values.row(static_cast<Eigen::Index>(j));
    for (std::size_t j : removed) change -= values.row(static_cast<Eigen::Index>(j));
    out.repair.row(t) = inv_k * change;
  }
  return out;
}

std::vector<LipschitzFunction> centred_lipschitz_functions(Eigen::Index dim, std::size_t count,
                                                           std::size_t pieces, Rng& rng) {
  std::vector<LipschitzFunction> out = random_lipschitz_functions(dim, count, pieces, rng);
  const Eigen::VectorXd centre = Eigen::VectorXd::Constant(dim, 0.5);
  for (LipschitzFunction& f : out) {
    const double at_centre = (f.slopes * centre + f.offsets).maxCoeff();
    f.offsets.array() -= at_centre;
  }
  return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("slope fit needs two or more paired points");
  }
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw std::domain_error("log-log fit needs positive values");
    }
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

namespace {

RateFit fit_points(const std::vector<int>& ks, const std::vector<double>& regret) {
  RateFit fit;
  std::vector<double> x;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    fit.points.push_back({ks[i], regret[i]});
    x.push_back(ks[i]);
  }
  fit.slope = loglog_slope(x, regret);
  return fit;
}

Eigen::VectorXd mixture_point(Rng& rng, const Eigen::MatrixXd& means) {
  const auto c = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(means.rows())));
  Eigen::VectorXd x(means.cols());
  for (Eigen::Index d = 0; d < x.size(); ++d) x[d] = means(c, d) + 0.5 * standard_normal(rng);
  return x;
}

}  // namespace

RateFit mmd_rate_suite(const RateSuiteOptions& options) {
  std::vector<double> regret(options.ks.size(), 0.0);
  for (int inst = 0; inst < options.instances; ++inst) {
    Rng rng(mix_seed(options.seed, static_cast<std::uint64_t>(inst)));
    Eigen::MatrixXd means(3, 2);
    for (Eigen::Index i = 0; i < means.size(); ++i) means.data()[i] = 1.5 * standard_normal(rng);
    std::vector<Item> items;
    for (int j = 0; j < options.candidates / 2; ++j) {
      items.push_back({std::to_string(j), mixture_point(rng, means)});
    }
    std::vector<LabeledPoint> source;
    for (int i = 0; i < options.sources; ++i) {
      const Label label = uniform01(rng) < 0.5 ? Label::kUp : Label::kDown;
      source.emplace_back(std::to_string(i), mixture_point(rng, means), label, 1.0);
    }
    const CandidatePool pool = build_candidate_pool(std::move(items), 1.0);
    const PreferenceSet prefs(std::move(source));
    const KernelMatrices mats = build_matrices(pool, prefs, KernelSpec{});
    const MmdObjective objective(mats);
    for (std::size_t ki = 0; ki < options.ks.size(); ++ki) {
      const int k = options.ks[ki];
      const FwResult fw = frank_wolfe(mats, k, options.fw_iterations);
      const double continuous = std::sqrt(std::max(0.0, fw.best_objective()));
      const std::vector<RoundingOutcome> runs =
          round_trials(fw.best, k, options.trials, objective, mix_seed(options.seed, 1000 + k));
      for (const RoundingOutcome& run : runs) regret[ki] += run.distance - continuous;
    }
  }
  for (double& r : regret) r /= static_cast<double>(options.instances * options.trials);
  return fit_points(options.ks, regret);
}

RateFit w1_rate_suite(const RateSuiteOptions& options) {
  std::vector<double> regret(options.ks.size(), 0.0);
  for (int inst = 0; inst < options.instances; ++inst) {
    Rng rng(mix_seed(options.seed, static_cast<std::uint64_t>(inst) + 500));
    Eigen::MatrixXd target(options.candidates, 1), source(options.w1_sources, 1);
    for (Eigen::Index j = 0; j < target.rows(); ++j) target(j, 0) = uniform01(rng);
    for (Eigen::Index i = 0; i < source.rows(); ++i) source(i, 0) = uniform01(rng);
    const CostMatrix costs(target, source);
    const W1Objective objective(costs, target, source);
    for (std::size_t ki = 0; ki < options.ks.size(); ++ki) {
      const int k = options.ks[ki];
      const JointLpSolution lp = solve_joint_lp(costs, k);
      const std::vector<RoundingOutcome> runs =
          round_trials(lp.weights, k, options.trials, objective, mix_seed(options.seed, 2000 + k));
      for (const RoundingOutcome& run : runs) regret[ki] += run.distance - lp.value;
    }
  }
  for (double& r : regret) r /= static_cast<double>(options.instances * options.trials);
  return fit_points(options.ks, regret);
}

}  // namespace preftransfer

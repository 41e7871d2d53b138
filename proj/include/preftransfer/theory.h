#ifndef PREFTRANSFER_THEORY_H_
#define PREFTRANSFER_THEORY_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "preftransfer/core.h"
#include "preftransfer/rounding.h"
#include "preftransfer/wasserstein.h"

namespace preftransfer {

/// Monte-Carlo checks of the rounding guarantees plus empirical rate fits.

struct CountMoments {
  double mean;
  double variance;  // unbiased (trials - 1)
  int trials;
};

/// Moments of |bernoulli_round(w)| over `trials` seeds seed+1, seed+2, ...
CountMoments rounding_count_moments(const CappedWeights& w, int trials, std::uint64_t seed,
                                    bool exclusive_labels = false);

/// Empirical (1 - delta)-quantile: the ceil((1 - delta) * N)-th smallest sample.
double upper_quantile(std::vector<double> samples, double delta);

/// sqrt(B / (delta K)).
double rkhs_rounding_bound(double kernel_bound, double delta, int k);
/// sqrt(d/(2K) ln(1/delta)) + sqrt(d)/(3K) ln(1/delta).
double lipschitz_rounding_bound(double dim, double delta, int k);

/// Per-trial perturbation norms in the RKHS of `gram`, computed exactly:
///   rounding: || sum_j (I_j/K - w_j) phi(z_j) ||
///   repair:   || sum_j (I'_j - I_j)/K phi(z_j) ||  (I' = indicator after repair)
struct RkhsPerturbations {
  std::vector<double> rounding;
  std::vector<double> repair;
};
RkhsPerturbations rkhs_perturbations(const Eigen::MatrixXd& gram, const CappedWeights& w,
                                     const SelectionObjective& repair_objective, int trials,
                                     std::uint64_t seed);

/// Per-trial signed deviations sum_j f(z_j) (I_j/K - w_j) and
/// sum_j f(z_j) (I'_j - I_j)/K for each test function (trials x functions).
struct LipschitzDeviations {
  Eigen::MatrixXd rounding;
  Eigen::MatrixXd repair;
};
LipschitzDeviations lipschitz_deviations(const Eigen::MatrixXd& target_rows,
                                         const CappedWeights& w,
                                         const SelectionObjective& repair_objective,
                                         std::span<const LipschitzFunction> functions, int trials,
                                         std::uint64_t seed);

/// Random 1-Lipschitz functions on [0,1]^d shifted to vanish at the cube
/// centre, so |f| <= sqrt(d)/2 on the cube.
std::vector<LipschitzFunction> centred_lipschitz_functions(Eigen::Index dim, std::size_t count,
                                                           std::size_t pieces, Rng& rng);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct RatePoint {
  int k;
  double mean_regret;  // mean over instances and trials of (achieved - continuous)
};
struct RateFit {
  std::vector<RatePoint> points;
  double slope;
};

struct RateSuiteOptions {
  std::vector<int> ks{4, 8, 16, 32, 64, 128};
  int instances = 4;
  int trials = 16;        // single rounding runs per (instance, K)
  int candidates = 512;   // 2m
  int sources = 64;       // n
  // Exceeds the largest K so the W1 relaxation stays fractional; with
  // n <= K its optimum is already a uniform K-subset and the regret is 0.
  int w1_sources = 257;
  int fw_iterations = 4000;
  std::uint64_t seed = 0;
};

/// MMD regret of single-shot rounding + repair against the Frank-Wolfe value,
/// on 2-D Gaussian-mixture instances with a label coordinate.
RateFit mmd_rate_suite(const RateSuiteOptions& options);
/// W1 regret against the exact joint LP value on one-dimensional uniform data.
RateFit w1_rate_suite(const RateSuiteOptions& options);

}  // namespace preftransfer

#endif  // PREFTRANSFER_THEORY_H_

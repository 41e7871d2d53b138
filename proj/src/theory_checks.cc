#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "preftransfer/experiments.h"
#include "preftransfer/frank_wolfe.h"
#include "preftransfer/kernels.h"
#include "preftransfer/random.h"
#include "preftransfer/text.h"
#include "preftransfer/theory.h"

namespace preftransfer {

namespace {

constexpr int kMonteCarloTrials = 10000;
constexpr int kLipschitzTrials = 2000;
constexpr double kNumericSlack = 1e-9;

void add_upper(TheoryReport& report, std::string name, double value, double bound) {
  report.lines.push_back({std::move(name), value, bound, value <= bound});
}

// w with K*w_j = 1 on the first K/2 candidates and the remaining mass spread
// at random over the others, so the count has nonzero variance.
CappedWeights moment_weights(std::size_t candidates, int k, Rng& rng) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(candidates));
  const int fixed = k / 2;
  for (int j = 0; j < fixed; ++j) w[j] = 1.0 / k;
  Eigen::VectorXd rest(static_cast<Eigen::Index>(candidates) - fixed);
  for (Eigen::Index j = 0; j < rest.size(); ++j) rest[j] = 0.05 + uniform01(rng);
  rest *= (1.0 - fixed / static_cast<double>(k)) / rest.sum();
  // Any entry over the cap would make the draw infeasible; the spread above
  // keeps every K*w_j well below one for the sizes used here.
  w.tail(rest.size()) = rest;
  return CappedWeights(w, k);
}

struct MixtureInstance {
  CandidatePool pool;
  PreferenceSet prefs;
};

MixtureInstance mixture_instance(std::size_t items, std::size_t sources, Rng& rng) {
  Eigen::MatrixXd means(3, 2);
  for (Eigen::Index i = 0; i < means.size(); ++i) means.data()[i] = 1.5 * standard_normal(rng);
  const auto draw = [&] {
    const auto c = static_cast<Eigen::Index>(uniform_index(rng, 3));
    Eigen::VectorXd x(2);
    for (Eigen::Index d = 0; d < 2; ++d) x[d] = means(c, d) + 0.5 * standard_normal(rng);
    return x;
  };
  std::vector<Item> pool_items;
  for (std::size_t j = 0; j < items; ++j) pool_items.push_back({std::to_string(j), draw()});
  std::vector<LabeledPoint> points;
  for (std::size_t i = 0; i < sources; ++i) {
    const Label label = uniform01(rng) < 0.5 ? Label::kUp : Label::kDown;
    points.emplace_back(std::to_string(i), draw(), label, 1.0);
  }
  return {build_candidate_pool(std::move(pool_items), 1.0), PreferenceSet(std::move(points))};
}

void count_checks(TheoryReport& report, std::uint64_t seed) {
  constexpr std::size_t kCandidates = 200;
  constexpr int kK = 20;
  Rng rng(mix_seed(seed, 11));
  const CappedWeights w = moment_weights(kCandidates, kK, rng);
  const CountMoments m = rounding_count_moments(w, kMonteCarloTrials, mix_seed(seed, 12));
  add_upper(report, "count mean |mean - K| (2m=200, K=20)", std::abs(m.mean - kK), 0.15);
  add_upper(report, "count variance (2m=200, K=20)", m.variance, 1.1 * kK);
}

void rkhs_checks(TheoryReport& report, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 21));
  const MixtureInstance inst = mixture_instance(400, 64, rng);
  const KernelSpec spec{};
  const KernelMatrices mats = build_matrices(inst.pool, inst.prefs, spec);
  const MmdObjective objective(mats);
  for (int k : {10, 50, 200}) {
    const FwResult fw = frank_wolfe(mats, k, 500);
    const RkhsPerturbations p =
        rkhs_perturbations(mats.tt(), fw.best, objective, kMonteCarloTrials, mix_seed(seed, 22 + k));
    for (double delta : {0.5, 0.25, 0.1}) {
      const double bound = rkhs_rounding_bound(spec.bound, delta, k);
      add_upper(report, fmt::format("rkhs rounding quantile (K={}, delta={})", k, delta),
                upper_quantile(p.rounding, delta), bound);
      add_upper(report, fmt::format("rkhs repair quantile (K={}, delta={})", k, delta),
                upper_quantile(p.repair, delta), bound);
    }
  }
}

void lipschitz_checks(TheoryReport& report, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 31));
  Eigen::MatrixXd target(100, 1), source(40, 1);
  for (Eigen::Index j = 0; j < target.rows(); ++j) target(j, 0) = uniform01(rng);
  for (Eigen::Index i = 0; i < source.rows(); ++i) source(i, 0) = uniform01(rng);
  const CostMatrix costs(target, source);
  const W1Objective objective(costs, target, source);
  const std::vector<LipschitzFunction> functions = centred_lipschitz_functions(1, 20, 4, rng);
  for (int k : {10, 25}) {
    const JointLpSolution lp = solve_joint_lp(costs, k);
    const LipschitzDeviations dev = lipschitz_deviations(target, lp.weights, objective, functions,
                                                         kLipschitzTrials, mix_seed(seed, 32 + k));
    std::vector<double> sup_repair(static_cast<std::size_t>(dev.repair.rows()));
    for (Eigen::Index t = 0; t < dev.repair.rows(); ++t) {
      sup_repair[static_cast<std::size_t>(t)] = dev.repair.row(t).cwiseAbs().maxCoeff();
    }
    for (double delta : {0.5, 0.25, 0.1}) {
      const double bound = lipschitz_rounding_bound(1.0, delta, k);
      double worst = 0.0;
      for (Eigen::Index f = 0; f < dev.rounding.cols(); ++f) {
        const Eigen::VectorXd col = dev.rounding.col(f).cwiseAbs();
        worst = std::max(worst, upper_quantile(std::vector<double>(col.begin(), col.end()), delta));
      }
      add_upper(report, fmt::format("lipschitz rounding quantile, worst f (d=1, K={}, delta={})", k, delta),
                worst, bound);
      add_upper(report, fmt::format("lipschitz repair quantile, sup f (d=1, K={}, delta={})", k, delta),
                upper_quantile(sup_repair, delta), bound);
    }
  }
}

void invariant_checks(TheoryReport& report, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 41));
  Eigen::MatrixXd points(60, 3);
  for (Eigen::Index i = 0; i < points.size(); ++i) points.data()[i] = standard_normal(rng);
  const Eigen::MatrixXd gram = gram_matrix(points, KernelSpec{});
  const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram).eigenvalues().minCoeff();
  add_upper(report, "kernel gram smallest eigenvalue (negated)", -min_eig, kNumericSlack);

  double duality = -1.0, triangle = -1.0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd a(12, 2), b(9, 2), c(7, 2);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = uniform01(rng);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = uniform01(rng);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = uniform01(rng);
    const Eigen::VectorXd ua = Eigen::VectorXd::Constant(a.rows(), 1.0 / a.rows());
    const Eigen::VectorXd uc = Eigen::VectorXd::Constant(c.rows(), 1.0 / c.rows());
    const double ab = w1_fixed(ua, CostMatrix(a, b));
    const double ac = w1_fixed(ua, CostMatrix(a, c));
    const double cb = w1_fixed(uc, CostMatrix(c, b));
    triangle = std::max(triangle, ab - ac - cb);
    const auto functions = random_lipschitz_functions(2, 10, 3, rng);
    duality = std::max(duality, w1_dual_check(ua, a, b, functions) - ab);
  }
  add_upper(report, "w1 weak duality (dual - primal)", duality, kNumericSlack);
  add_upper(report, "w1 triangle inequality excess", triangle, kNumericSlack);
}

void rate_checks(TheoryReport& report, std::uint64_t seed) {
  RateSuiteOptions options;
  options.seed = seed;
  const RateFit mmd = mmd_rate_suite(options);
  add_upper(report, "mmd regret log-log slope", mmd.slope, -0.35);
  const RateFit w1 = w1_rate_suite(options);
  add_upper(report, "w1 regret log-log slope (d=1)", w1.slope, -0.25);
}

}  // namespace

TheoryReport cmd_theory_checks(const ExperimentOptions& options) {
  const std::uint64_t seed = options.run.seed;
  TheoryReport report;
  count_checks(report, seed);
  rkhs_checks(report, seed);
  lipschitz_checks(report, seed);
  invariant_checks(report, seed);
  rate_checks(report, seed);

  report.path = options.out_dir / "theory_checks.txt";
  std::filesystem::create_directories(options.out_dir);
  std::ofstream out(report.path, std::ios::binary);
  out << fmt::format("seed {}\n", seed);
  for (const CheckLine& line : report.lines) {
    out << fmt::format("{} {}  value {}  bound {}\n", line.pass ? "PASS" : "FAIL", line.name,
                       format_double(line.value), format_double(line.bound));
  }
  out << (report.all_pass() ? "ALL PASS\n" : "SOME CHECKS FAILED\n");
  return report;
}

}  // namespace preftransfer

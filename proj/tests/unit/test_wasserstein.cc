#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "../oracles.h"
#include "preftransfer/min_cost_flow.h"
#include "preftransfer/random.h"
#include "preftransfer/wasserstein.h"

using namespace preftransfer;

namespace {

Eigen::MatrixXd uniform_rows(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform01(rng);
  return m;
}

std::vector<double> column(const Eigen::MatrixXd& m) {
  return std::vector<double>(m.data(), m.data() + m.rows());
}

Eigen::VectorXd random_simplex(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd w(n);
  for (Eigen::Index j = 0; j < n; ++j) w[j] = 0.05 + uniform01(rng);
  return w / w.sum();
}

}  // namespace

TEST_CASE("min-cost flow on a hand-checked network") {
  // Two units from 0 to 3; the cheap path 0-1-3 only carries one.
  MinCostFlow<std::int64_t> g(4);
  g.add_arc(0, 1, 1, 1.0);
  g.add_arc(0, 2, 2, 2.0);
  g.add_arc(1, 3, 2, 1.0);
  g.add_arc(2, 3, 2, 2.0);
  const auto r = g.solve(0, 3, 2);
  CHECK(r.flow == 2);
  CHECK(r.cost == doctest::Approx(6.0));
  CHECK_THROWS_AS(g.add_arc(0, 1, 1, -1.0), std::invalid_argument);
}

TEST_CASE("w1 of identical measures is zero") {
  Rng rng(53);
  const Eigen::MatrixXd pts = uniform_rows(rng, 5, 3);
  CHECK(w1_fixed(oracle::uniform(5), CostMatrix(pts, pts)) == doctest::Approx(0.0));
}

TEST_CASE("w1 between {0,1} and {0.5,1.5} is one half") {
  Eigen::MatrixXd a(2, 1), b(2, 1);
  a << 0.0, 1.0;
  b << 0.5, 1.5;
  CHECK(w1_fixed(oracle::uniform(2), CostMatrix(a, b)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w1_selection(std::vector<std::size_t>{0, 1}, CostMatrix(a, b)) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("flow w1 agrees with the 1-D quantile coupling") {
  Rng rng(59);
  for (int t = 0; t < 100; ++t) {
    const auto na = static_cast<Eigen::Index>(1 + uniform_index(rng, 8));
    const auto nb = static_cast<Eigen::Index>(1 + uniform_index(rng, 8));
    const Eigen::MatrixXd a = uniform_rows(rng, na, 1), b = uniform_rows(rng, nb, 1);
    const Eigen::VectorXd wa = random_simplex(rng, na);
    const double flow = w1_fixed(wa, CostMatrix(a, b));
    const std::vector<double> wav(wa.data(), wa.data() + na);
    const double quantile = oracle::w1_quantile(column(a), wav, column(b),
                                                std::vector<double>(static_cast<std::size_t>(nb), 1.0 / nb));
    CHECK(std::abs(flow - quantile) <= 1e-9);
    CHECK(std::abs(w1_on_line(column(a), wav, column(b),
                              std::vector<double>(static_cast<std::size_t>(nb), 1.0 / nb)) -
                   quantile) <= 1e-9);
  }
}

TEST_CASE("hungarian oracle agrees with the permutation scan") {
  Rng rng(61);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd c = uniform_rows(rng, 6, 6);
    CHECK(oracle::assignment_cost(c) == doctest::Approx(oracle::permutation_cost(c)).epsilon(1e-12));
  }
}

TEST_CASE("flow w1 agrees with brute-force assignment on balanced instances") {
  Rng rng(67);
  for (int t = 0; t < 20; ++t) {
    const auto n = static_cast<Eigen::Index>(2 + uniform_index(rng, 6));
    const Eigen::MatrixXd a = uniform_rows(rng, n, 2), b = uniform_rows(rng, n, 2);
    const CostMatrix costs(a, b);
    const double brute = oracle::permutation_cost(costs.costs()) / static_cast<double>(n);
    CHECK(std::abs(w1_fixed(oracle::uniform(n), costs) - brute) <= 1e-8);
    std::vector<std::size_t> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    CHECK(std::abs(w1_selection(all, costs) - brute) <= 1e-8);
  }
}

TEST_CASE("w1 triangle inequality on random triples") {
  Rng rng(71);
  for (int t = 0; t < 30; ++t) {
    const Eigen::MatrixXd a = uniform_rows(rng, 5, 2), b = uniform_rows(rng, 4, 2),
                          c = uniform_rows(rng, 6, 2);
    const double ab = w1_fixed(oracle::uniform(5), CostMatrix(a, b));
    const double ac = w1_fixed(oracle::uniform(5), CostMatrix(a, c));
    const double cb = w1_fixed(oracle::uniform(6), CostMatrix(c, b));
    CHECK(ab <= ac + cb + 1e-8);
  }
}

TEST_CASE("w1 rejects mismatched marginals") {
  Eigen::MatrixXd a(2, 1), b(1, 1);
  a << 0.0, 1.0;
  b << 0.5;
  Eigen::VectorXd w(2);
  w << 0.5, 0.4;
  CHECK_THROWS_AS(w1_fixed(w, CostMatrix(a, b)), std::invalid_argument);
  Eigen::MatrixXd c(1, 2);
  CHECK_THROWS_AS(CostMatrix(a, c), std::invalid_argument);
}

TEST_CASE("flow scale is lcm(K, n) within budget") {
  CHECK(flow_scale(4, 6) == 12);
  CHECK(flow_scale(1, 1) == 1);
  CHECK_THROWS_AS(flow_scale(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(flow_scale((1LL << 21) + 1, (1LL << 21) - 1), std::overflow_error);
}

TEST_CASE("joint LP on the non-monotonicity counterexample") {
  // Items x1 = 0 and x2 = 1, source {(1, up)}, C = 1: candidate 2 is (1, 1).
  Eigen::MatrixXd target(4, 2), source(1, 2);
  target << 0, 1, 0, 0, 1, 1, 1, 0;
  source << 1, 1;
  const CostMatrix costs(target, source);
  const JointLpSolution k1 = solve_joint_lp(costs, 1);
  CHECK(k1.value == doctest::Approx(0.0));
  CHECK(k1.weights[2] == doctest::Approx(1.0));
  const JointLpSolution k2 = solve_joint_lp(costs, 2);
  CHECK(k2.value > 0.1);
  CHECK_THROWS_AS(solve_joint_lp(costs, 5), std::invalid_argument);
}

TEST_CASE("joint LP is zero when the pool holds the source exactly") {
  Rng rng(73);
  const Eigen::MatrixXd source = uniform_rows(rng, 3, 2);
  Eigen::MatrixXd target(8, 2);
  target << uniform_rows(rng, 5, 2), source;
  const JointLpSolution lp = solve_joint_lp(CostMatrix(target, source), 3);
  CHECK(lp.value == doctest::Approx(0.0));
  for (Eigen::Index j = 5; j < 8; ++j) CHECK(lp.weights.values()[j] == doctest::Approx(1.0 / 3));
  CHECK(lp.weights.values().head(5).sum() == doctest::Approx(0.0));
}

TEST_CASE("joint LP matches grid search with exact transport") {
  Rng rng(79);
  for (int t = 0; t < 20; ++t) {
    const auto m2 = static_cast<int>(4 + 2 * uniform_index(rng, 2));  // 4 or 6
    const auto n = static_cast<int>(1 + uniform_index(rng, 4));
    const int k = static_cast<int>(1 + uniform_index(rng, 3));
    const Eigen::MatrixXd target = uniform_rows(rng, m2, 2), source = uniform_rows(rng, n, 2);
    const CostMatrix costs(target, source);
    const JointLpSolution lp = solve_joint_lp(costs, k);

    // Vertices of the flow polytope carry multiples of 1/F, so this grid holds an optimum.
    const int f = std::lcm(k, n);
    double best = std::numeric_limits<double>::infinity();
    oracle::for_each_composition(f, m2, f / k, [&](const std::vector<int>& a) {
      best = std::min(best, oracle::ot_integer(costs.costs(), a,
                                               std::vector<int>(static_cast<std::size_t>(n), f / n)));
    });
    CHECK(std::abs(lp.value - best) <= 1e-6);
    CHECK(w1_fixed(lp.weights, costs) == doctest::Approx(lp.value).epsilon(1e-9));
    CHECK(CappedWeights::feasible(lp.weights.values(), k));
  }
}

TEST_CASE("joint LP coupling marginals and dominance over subsets") {
  Rng rng(83);
  const Eigen::MatrixXd target = uniform_rows(rng, 12, 2), source = uniform_rows(rng, 5, 2);
  const CostMatrix costs(target, source);
  const int k = 4;
  const JointLpSolution lp = solve_joint_lp(costs, k);
  const Eigen::VectorXd rows = lp.coupling.rowwise().sum();
  const Eigen::VectorXd cols = lp.coupling.colwise().sum().transpose();
  CHECK((rows - lp.weights.values()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((cols.array() - 1.0 / 5).abs().maxCoeff() < 1e-12);
  CHECK((lp.coupling.array() * costs.costs().array()).sum() == doctest::Approx(lp.value));
  for (int t = 0; t < 100; ++t) {
    const auto subset = sample_without_replacement(rng, 12, k);
    CHECK(lp.value <= w1_selection(subset, costs) + 1e-12);
  }
}

TEST_CASE("lipschitz dual estimate never exceeds the primal") {
  Rng rng(89);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd a = uniform_rows(rng, 6, 2), b = uniform_rows(rng, 4, 2);
    const auto fns = random_lipschitz_functions(2, 30, 4, rng);
    const Eigen::VectorXd w = oracle::uniform(6);
    CHECK(w1_dual_check(w, a, b, fns) <= w1_fixed(w, CostMatrix(a, b)) + 1e-9);
    CHECK(w1_dual_check(oracle::uniform(4), b, b, fns) <= 1e-9);
  }
  // f(x) = x attains W1 between {0,1} and {0.5,1.5} exactly.
  Eigen::MatrixXd a(2, 1), b(2, 1);
  a << 0.0, 1.0;
  b << 0.5, 1.5;
  LipschitzFunction identity{Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1), -1.0};
  CHECK(w1_dual_check(oracle::uniform(2), a, b, std::vector<LipschitzFunction>{identity}) ==
        doctest::Approx(0.5));
}

TEST_CASE("random lipschitz functions respect the slope bound") {
  Rng rng(97);
  const auto fns = random_lipschitz_functions(3, 10, 5, rng);
  for (const auto& f : fns) {
    for (Eigen::Index p = 0; p < f.slopes.rows(); ++p) CHECK(f.slopes.row(p).norm() <= 1.0 + 1e-12);
    for (int t = 0; t < 20; ++t) {
      Eigen::VectorXd x(3), y(3);
      for (int i = 0; i < 3; ++i) {
        x[i] = uniform01(rng);
        y[i] = uniform01(rng);
      }
      CHECK(std::abs(f(x) - f(y)) <= (x - y).norm() + 1e-12);
    }
  }
}

// Reference computations for the tests. Each one takes a different route
// from the library: double sums instead of cached quadratic forms, quantile
// couplings instead of CDF integrals, Hungarian assignment instead of flows.
#ifndef PREFTRANSFER_TESTS_ORACLES_H_
#define PREFTRANSFER_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline double gauss(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double sigma) {
  double sq = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) sq += (x[i] - y[i]) * (x[i] - y[i]);
  return std::exp(-sq / (2.0 * sigma * sigma));
}

/// MMD^2 between sum_i a_i delta(x_i) and sum_j b_j delta(y_j) by the three double sums.
inline double mmd2(const Eigen::MatrixXd& x, const Eigen::VectorXd& a, const Eigen::MatrixXd& y,
                   const Eigen::VectorXd& b, double sigma) {
  double xx = 0.0, xy = 0.0, yy = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.rows(); ++j) {
      xx += a[i] * a[j] * gauss(x.row(i), x.row(j), sigma);
    }
    for (Eigen::Index j = 0; j < y.rows(); ++j) {
      xy += a[i] * b[j] * gauss(x.row(i), y.row(j), sigma);
    }
  }
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    for (Eigen::Index j = 0; j < y.rows(); ++j) {
      yy += b[i] * b[j] * gauss(y.row(i), y.row(j), sigma);
    }
  }
  return xx - 2.0 * xy + yy;
}

inline Eigen::VectorXd uniform(Eigen::Index n) {
  return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
}

/// Uniform weights on `subset` within a vector of length n.
inline Eigen::VectorXd subset_weights(const std::vector<std::size_t>& subset, Eigen::Index n) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (std::size_t j : subset) w[static_cast<Eigen::Index>(j)] = 1.0 / subset.size();
  return w;
}

/// Calls f on every k-subset of {0..n-1}, in lexicographic order.
inline void for_each_subset(std::size_t n, std::size_t k,
                            const std::function<void(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    f(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

/// Central finite-difference gradient.
inline Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd p = x, m = x;
    p[i] += h;
    m[i] -= h;
    g[i] = (f(p) - f(m)) / (2.0 * h);
  }
  return g;
}

/// W1 on the line as the L1 distance between quantile functions.
inline double w1_quantile(std::vector<double> xa, std::vector<double> wa, std::vector<double> xb,
                          std::vector<double> wb) {
  const auto sort_by_point = [](std::vector<double>& x, std::vector<double>& w) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
    std::vector<double> xs, ws;
    for (std::size_t i : order) {
      xs.push_back(x[i]);
      ws.push_back(w[i]);
    }
    x = xs;
    w = ws;
  };
  sort_by_point(xa, wa);
  sort_by_point(xb, wb);
  std::size_t i = 0, j = 0;
  double ra = wa[0], rb = wb[0], total = 0.0;
  while (i < xa.size() && j < xb.size()) {
    const double step = std::min(ra, rb);
    total += step * std::abs(xa[i] - xb[j]);
    ra -= step;
    rb -= step;
    if (ra <= 1e-15) {
      if (++i < xa.size()) ra = wa[i];
    }
    if (rb <= 1e-15) {
      if (++j < xb.size()) rb = wb[j];
    }
  }
  return total;
}

/// Minimum-cost perfect assignment of a square cost matrix (Hungarian method, O(n^3)).
inline double assignment_cost(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) total += cost(p[j] - 1, j - 1);
  return total;
}

/// Minimum over all permutations (n <= 8), for checking the Hungarian code itself.
inline double permutation_cost(const Eigen::MatrixXd& cost) {
  std::vector<int> perm(static_cast<std::size_t>(cost.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) c += cost(static_cast<Eigen::Index>(i), perm[i]);
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Exact OT between integer masses `a` and `b` (equal totals, in units of 1/total):
/// expand every unit into an atom and solve the assignment.
inline double ot_integer(const Eigen::MatrixXd& cost, const std::vector<int>& a,
                         const std::vector<int>& b) {
  std::vector<Eigen::Index> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) rows.insert(rows.end(), a[i], static_cast<Eigen::Index>(i));
  for (std::size_t j = 0; j < b.size(); ++j) cols.insert(cols.end(), b[j], static_cast<Eigen::Index>(j));
  const auto total = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd expanded(total, total);
  for (Eigen::Index r = 0; r < total; ++r) {
    for (Eigen::Index c = 0; c < total; ++c) {
      expanded(r, c) = cost(rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]);
    }
  }
  return assignment_cost(expanded) / static_cast<double>(total);
}

/// Calls f on every vector of `parts` non-negative integers summing to `total`
/// with every entry at most `cap`.
inline void for_each_composition(int total, int parts, int cap,
                                 const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> x(static_cast<std::size_t>(parts), 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == parts - 1) {
      if (left <= cap) {
        x[static_cast<std::size_t>(pos)] = left;
        f(x);
      }
      return;
    }
    for (int v = 0; v <= std::min(cap, left); ++v) {
      x[static_cast<std::size_t>(pos)] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, total);
}

/// Euclidean projection onto {w : sum w = 1, 0 <= w <= cap} by bisection on the shift.
inline Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& v, double cap) {
  double lo = v.minCoeff() - cap - 1.0, hi = v.maxCoeff() + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double s = (v.array() - mid).max(0.0).min(cap).sum();
    (s > 1.0 ? lo : hi) = mid;
  }
  return (v.array() - 0.5 * (lo + hi)).max(0.0).min(cap).matrix();
}

/// min over the capped simplex of w'Qw - 2 b'w + c by accelerated projected
/// gradient, run far past the tolerances the tests use.
inline double capped_qp_min(const Eigen::MatrixXd& q, const Eigen::VectorXd& b, double c, int k,
                            int iterations = 20000) {
  const double cap = 1.0 / k;
  const double lipschitz =
      2.0 * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q).eigenvalues().maxCoeff() + 1e-12;
  const auto f = [&](const Eigen::VectorXd& w) { return w.dot(q * w) - 2.0 * b.dot(w) + c; };
  Eigen::VectorXd w = Eigen::VectorXd::Constant(b.size(), 1.0 / b.size());
  Eigen::VectorXd y = w;
  double t = 1.0, best = f(w);
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd grad = 2.0 * (q * y) - 2.0 * b;
    const Eigen::VectorXd next = project_capped_simplex(y - grad / lipschitz, cap);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / tn) * (next - w);
    w = next;
    t = tn;
    best = std::min(best, f(w));
  }
  return best;
}

/// Half-width of a z-sigma binomial interval for a proportion p over n draws.
inline double binomial_halfwidth(double p, double n, double z = 3.0) {
  return z * std::sqrt(p * (1.0 - p) / n);
}

}  // namespace oracle

#endif  // PREFTRANSFER_TESTS_ORACLES_H_

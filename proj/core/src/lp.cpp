#include "seqgrasp/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace seqgrasp::lp {

namespace {

constexpr double kReducedCostTol = 1e-9;
constexpr double kPivotTol = 1e-10;

struct Tableau {
  Eigen::MatrixXd m;        // rows x (n_total + 1), last column is b
  std::vector<int> basis;   // basic column per row
  int n_struct = 0;         // structural (non-artificial) columns
  int n_total = 0;

  int rows() const { return static_cast<int>(m.rows()); }

  void pivot(int row, int col) {
    m.row(row) /= m(row, col);
    for (int i = 0; i < rows(); ++i) {
      if (i != row && std::abs(m(i, col)) > 0) {
        m.row(i) -= m(i, col) * m.row(row);
      }
    }
    basis[row] = col;
  }

  /// Runs simplex iterations for the cost vector `cost` (size n_total),
  /// entering columns restricted to [0, allowed_cols). Returns false when
  /// the problem is unbounded in the entering direction.
  bool iterate(const Eigen::VectorXd& cost, int allowed_cols) {
    const long max_iters = 4096L * (rows() + n_total);
    for (long iter = 0; iter < max_iters; ++iter) {
      // Reduced costs under the current basis.
      Eigen::VectorXd y = Eigen::VectorXd::Zero(rows());
      for (int i = 0; i < rows(); ++i) y[i] = cost[basis[i]];

      int entering = -1;
      for (int j = 0; j < allowed_cols; ++j) {
        double rj = cost[j] - y.dot(m.col(j));
        if (rj < -kReducedCostTol) {
          entering = j;  // Bland: smallest index
          break;
        }
      }
      if (entering < 0) return true;  // optimal

      int leaving = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows(); ++i) {
        const double aij = m(i, entering);
        if (aij > kPivotTol) {
          const double ratio = m(i, n_total) / aij;
          if (ratio < best_ratio - 1e-15 ||
              (ratio < best_ratio + 1e-15 && (leaving < 0 || basis[i] < basis[leaving]))) {
            best_ratio = ratio;
            leaving = i;
          }
        }
      }
      if (leaving < 0) return false;  // unbounded
      pivot(leaving, entering);
    }
    throw std::runtime_error("lp::solve: iteration limit exceeded");
  }
};

}  // namespace

Result solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const int rows = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (b.size() != rows || c.size() != n) {
    throw std::invalid_argument("lp::solve: inconsistent dimensions");
  }

  Tableau t;
  t.n_struct = n;
  t.n_total = n + rows;  // one artificial per row
  t.m.resize(rows, t.n_total + 1);
  t.m.setZero();
  for (int i = 0; i < rows; ++i) {
    const double sign = b[i] < 0 ? -1.0 : 1.0;
    t.m.block(i, 0, 1, n) = sign * a.row(i);
    t.m(i, n + i) = 1.0;
    t.m(i, t.n_total) = sign * b[i];
    t.basis.push_back(n + i);
  }

  // Phase 1: minimize the artificial sum.
  Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(t.n_total);
  phase1_cost.tail(rows).setOnes();
  t.iterate(phase1_cost, t.n_total);

  Result res;
  double p1 = 0.0;
  for (int i = 0; i < rows; ++i) {
    if (t.basis[i] >= n) p1 += t.m(i, t.n_total);
  }
  res.phase1_objective = p1;
  if (p1 > 1e-8) {
    res.status = Status::kInfeasible;
    return res;
  }

  // Drive any zero-level artificials out of the basis when possible.
  for (int i = 0; i < rows; ++i) {
    if (t.basis[i] >= n) {
      for (int j = 0; j < n; ++j) {
        if (std::abs(t.m(i, j)) > kPivotTol) {
          t.pivot(i, j);
          break;
        }
      }
    }
  }

  // Phase 2: original costs, artificial columns barred from entering.
  Eigen::VectorXd phase2_cost = Eigen::VectorXd::Zero(t.n_total);
  phase2_cost.head(n) = c;
  const bool bounded = t.iterate(phase2_cost, n);

  res.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < rows; ++i) {
    if (t.basis[i] < n) res.x[t.basis[i]] = t.m(i, t.n_total);
  }
  res.objective = c.dot(res.x);
  res.status = bounded ? Status::kOptimal : Status::kUnbounded;
  return res;
}

}  // namespace seqgrasp::lp

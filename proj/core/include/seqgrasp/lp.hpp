#pragma once

#include <Eigen/Dense>

namespace seqgrasp::lp {

enum class Status { kOptimal, kInfeasible, kUnbounded };

struct Result {
  Status status = Status::kInfeasible;
  Eigen::VectorXd x;          // primal point (feasible when optimal)
  double objective = 0.0;     // c'x at the returned point
  double phase1_objective = 0.0;  // min sum of artificials = L1 infeasibility
};

/// Solves  min c'x  s.t.  A x = b,  x >= 0  with a dense two-phase tableau
/// simplex using Bland's rule. Problem sizes in this project are tiny
/// (tens of rows, low hundreds of columns), so clarity wins over speed.
Result solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c);

}  // namespace seqgrasp::lp

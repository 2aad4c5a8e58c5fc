#pragma once

#include <Eigen/Dense>

namespace microgait {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  Eigen::VectorXd x;
};

// maximize c'x  subject to  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0.
// Dense two-phase revised simplex (Dantzig pricing, lexicographic ratio
// test for degeneracy, per-iteration LU refactorization); intended for the small
// membership problems posed by the contact-wrench module.
LpResult solve_lp(const Eigen::VectorXd& c,
                  const Eigen::MatrixXd& A_eq, const Eigen::VectorXd& b_eq,
                  const Eigen::MatrixXd& A_ub, const Eigen::VectorXd& b_ub);

}  // namespace microgait

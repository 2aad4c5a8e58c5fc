#include "microgait/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace microgait {

namespace {

constexpr double kCostTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kRatioTol = 1e-11;
constexpr int kMaxIters = 50000;

// Revised simplex over the standard-form columns held in `A` (m x n_total).
// The basis inverse is refactorized from the original data on every
// iteration, so numerical error cannot accumulate across pivots; the
// problems posed by the contact-wrench module are small enough (m <= a few
// dozen rows) that the extra LU per iteration is cheap. Minimizes `cost`
// with Dantzig pricing and the lexicographic ratio test, which resolves the
// highly degenerate bases these membership LPs produce (the equality RHS is
// all zeros) without cycling.
//
// `allowed` masks columns that may enter the basis. Returns false on
// unboundedness or iteration breakdown.
bool revised_simplex(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                     const Eigen::VectorXd& cost, const std::vector<bool>& allowed,
                     std::vector<int>& basis, Eigen::VectorXd& x_basic) {
  const int m = static_cast<int>(A.rows());
  const int n_total = static_cast<int>(A.cols());

  Eigen::MatrixXd B(m, m);
  std::vector<char> in_basis(n_total, 0);
  for (int i = 0; i < m; ++i) in_basis[basis[i]] = 1;

  for (int iter = 0; iter < kMaxIters; ++iter) {
    for (int i = 0; i < m; ++i) B.col(i) = A.col(basis[i]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    x_basic = lu.solve(b);

    Eigen::VectorXd c_b(m);
    for (int i = 0; i < m; ++i) c_b(i) = cost(basis[i]);
    const Eigen::VectorXd y = lu.transpose().solve(c_b);

    // Dantzig: entering = allowed nonbasic column with the most negative
    // reduced cost.
    int enter = -1;
    double most_negative = -kCostTol;
    for (int j = 0; j < n_total; ++j) {
      if (in_basis[j] || !allowed[j]) continue;
      const double reduced = cost(j) - y.dot(A.col(j));
      if (reduced < most_negative) {
        most_negative = reduced;
        enter = j;
      }
    }
    if (enter < 0) return true;  // optimal

    const Eigen::VectorXd u = lu.solve(A.col(enter));

    // Lexicographic ratio test: among the admissible rows, minimize
    // [x_B(i), row i of B^-1] / u(i) lexicographically. The first component
    // is the classic min-ratio rule; the B^-1 components break degenerate
    // ties in a way that provably cannot cycle.
    const Eigen::MatrixXd B_inv = lu.inverse();
    std::vector<int> ties;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (u(i) > kPivotTol) {
        const double ratio = std::max(x_basic(i), 0.0) / u(i);
        if (ratio < best_ratio - kRatioTol) {
          best_ratio = ratio;
          ties.assign(1, i);
        } else if (ratio <= best_ratio + kRatioTol) {
          best_ratio = std::min(best_ratio, ratio);
          ties.push_back(i);
        }
      }
    }
    if (ties.empty()) return false;  // unbounded
    for (int col = 0; col < m && ties.size() > 1; ++col) {
      double best = std::numeric_limits<double>::infinity();
      std::vector<int> next;
      for (int i : ties) {
        const double v = B_inv(i, col) / u(i);
        if (v < best - kRatioTol) {
          best = v;
          next.assign(1, i);
        } else if (v <= best + kRatioTol) {
          best = std::min(best, v);
          next.push_back(i);
        }
      }
      ties.swap(next);
    }
    const int leave = ties.front();

    in_basis[basis[leave]] = 0;
    in_basis[enter] = 1;
    basis[leave] = enter;
  }
  return false;  // iteration cap: treat as breakdown
}

}  // namespace

LpResult solve_lp(const Eigen::VectorXd& c,
                  const Eigen::MatrixXd& A_eq, const Eigen::VectorXd& b_eq,
                  const Eigen::MatrixXd& A_ub, const Eigen::VectorXd& b_ub) {
  const int n = static_cast<int>(c.size());
  const int m_eq = static_cast<int>(b_eq.size());
  const int m_ub = static_cast<int>(b_ub.size());
  const int m = m_eq + m_ub;

  // No constraints: x = 0 is optimal unless some cost coefficient rewards
  // growing a variable without bound.
  if (m == 0) {
    if (n > 0 && c.maxCoeff() > kCostTol) {
      return LpResult{LpStatus::Unbounded, 0.0, Eigen::VectorXd::Zero(n)};
    }
    return LpResult{LpStatus::Optimal, 0.0, Eigen::VectorXd::Zero(n)};
  }

  // Standard form columns: n structural, m_ub slacks, m artificials.
  const int n_slack = m_ub;
  const int n_total = n + n_slack + m;

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, n_total);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m_eq; ++i) {
    A.block(i, 0, 1, n) = A_eq.row(i);
    b(i) = b_eq(i);
  }
  for (int i = 0; i < m_ub; ++i) {
    const int r = m_eq + i;
    A.block(r, 0, 1, n) = A_ub.row(i);
    A(r, n + i) = 1.0;  // slack
    b(r) = b_ub(i);
  }
  // Normalize RHS >= 0 (flips slack signs too, which is fine: artificials
  // provide the starting basis for every row).
  for (int i = 0; i < m; ++i) {
    if (b(i) < 0.0) {
      A.row(i) *= -1.0;
      b(i) = -b(i);
    }
    A(i, n + n_slack + i) = 1.0;  // artificial
  }

  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + n_slack + i;
  Eigen::VectorXd x_basic;

  // Phase 1: minimize the sum of artificials.
  Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(n_total);
  for (int i = 0; i < m; ++i) phase1_cost(n + n_slack + i) = 1.0;
  std::vector<bool> allow_all(n_total, true);
  if (!revised_simplex(A, b, phase1_cost, allow_all, basis, x_basic)) {
    return LpResult{LpStatus::Infeasible, 0.0, Eigen::VectorXd::Zero(n)};
  }
  double art_sum = 0.0;
  for (int i = 0; i < m; ++i) {
    if (basis[i] >= n + n_slack) art_sum += std::abs(x_basic(i));
  }
  if (art_sum > 1e-7 * std::max(1.0, b.cwiseAbs().maxCoeff())) {
    return LpResult{LpStatus::Infeasible, 0.0, Eigen::VectorXd::Zero(n)};
  }

  // Drive artificials (basic at zero after a successful phase 1) out of the
  // basis; rows where no structural or slack column can pivot in are
  // redundant and get dropped, so phase 2 never touches an artificial again.
  for (int pass = 0; pass < m; ++pass) {
    int art_row = -1;
    for (int i = 0; i < static_cast<int>(basis.size()); ++i) {
      if (basis[i] >= n + n_slack) {
        art_row = i;
        break;
      }
    }
    if (art_row < 0) break;
    const int rows = static_cast<int>(basis.size());
    Eigen::MatrixXd B(rows, rows);
    for (int i = 0; i < rows; ++i) B.col(i) = A.col(basis[i]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    int enter = -1;
    for (int j = 0; j < n + n_slack && enter < 0; ++j) {
      bool basic = false;
      for (int i = 0; i < rows; ++i) basic = basic || basis[i] == j;
      if (basic) continue;
      const Eigen::VectorXd u = lu.solve(A.col(j));
      if (std::abs(u(art_row)) > 1e-8) enter = j;
    }
    if (enter >= 0) {
      basis[art_row] = enter;
    } else {
      // Redundant row: remove it from the system.
      const int last = rows - 1;
      if (art_row != last) {
        A.row(art_row).swap(A.row(last));
        std::swap(b(art_row), b(last));
        std::swap(basis[art_row], basis[last]);
      }
      A.conservativeResize(last, Eigen::NoChange);
      b.conservativeResize(last);
      basis.pop_back();
    }
  }

  // Phase 2: maximize c'x == minimize -c'x over structural and slack
  // columns only.
  Eigen::VectorXd phase2_cost = Eigen::VectorXd::Zero(n_total);
  phase2_cost.head(n) = -c;
  std::vector<bool> allowed(n_total, true);
  for (int j = n + n_slack; j < n_total; ++j) allowed[j] = false;
  if (!revised_simplex(A, b, phase2_cost, allowed, basis, x_basic)) {
    return LpResult{LpStatus::Unbounded, 0.0, Eigen::VectorXd::Zero(n)};
  }

  LpResult out;
  out.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < static_cast<int>(basis.size()); ++i) {
    if (basis[i] < n) out.x(basis[i]) = std::max(x_basic(i), 0.0);
  }
  out.objective = c.dot(out.x);
  out.status = LpStatus::Optimal;
  return out;
}

}  // namespace microgait

#pragma once

#include <stdexcept>
#include <vector>

namespace microgait {

struct TooFewPairs : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PairedTTest {
  double mean_delta = 0.0;
  double sd_delta = 0.0;
  double t = 0.0;
  double p = 1.0;  // two-sided
  int dof = 0;
};

// Two-sided paired t-test on b - a. Throws TooFewPairs for n < 2 or mismatched
// lengths. All-zero deltas give t = 0, p = 1; zero variance with a nonzero
// mean is reported as maximally significant (p = 0).
PairedTTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

// Regularized incomplete beta function I_x(a, b) via the Lentz continued
// fraction; used for the Student-t tail probability.
double incomplete_beta(double a, double b, double x);

// Two-sided p-value for Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, int dof);

}  // namespace microgait

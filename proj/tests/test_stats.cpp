#include "doctest.h"

#include <cmath>
#include <vector>

#include "microgait/stats.hpp"

using namespace microgait;

TEST_CASE("paired_t_test: input validation") {
  CHECK_THROWS_AS(paired_t_test({1.0}, {2.0}), TooFewPairs);
  CHECK_THROWS_AS(paired_t_test({1.0, 2.0}, {1.0}), TooFewPairs);
  CHECK_THROWS_AS(paired_t_test({}, {}), TooFewPairs);
}

TEST_CASE("paired_t_test: all-zero deltas give t = 0, p = 1") {
  const std::vector<double> a = {1.0, 2.0, 3.0, 4.0};
  const PairedTTest r = paired_t_test(a, a);
  CHECK(r.t == doctest::Approx(0.0));
  CHECK(r.p == doctest::Approx(1.0));
  CHECK(r.dof == 3);
}

TEST_CASE("paired_t_test: zero variance with nonzero mean is maximally significant") {
  const std::vector<double> a = {1.0, 2.0, 3.0};
  const std::vector<double> b = {2.0, 3.0, 4.0};  // constant delta 1
  const PairedTTest r = paired_t_test(a, b);
  CHECK(r.mean_delta == doctest::Approx(1.0));
  CHECK(r.p == doctest::Approx(0.0));
}

TEST_CASE("paired_t_test: textbook datasets within 1e-3 in p") {
  struct Dataset {
    std::vector<double> a, b;
    double t, p;
  };
  // Reference values computed with the standard paired-t formula and the
  // Student-t CDF (cross-checked against published tables).
  const std::vector<Dataset> datasets = {
      // deltas 1..5: t = 3 / (1.5811/sqrt(5)) = 4.2426, p = 0.0132.
      {{0, 0, 0, 0, 0}, {1, 2, 3, 4, 5}, 4.242641, 0.013236},
      // Classic blood-pressure style pairs, n = 10.
      {{120, 122, 143, 100, 109, 112, 92, 126, 105, 133},
       {128, 120, 141, 108, 115, 110, 100, 130, 111, 137},
       2.818469, 0.020097},
      // Small n = 4 with a weak effect.
      {{10, 12, 9, 11}, {11, 13, 9, 12}, 3.0, 0.057669},
      // Negative effect, n = 6.
      {{5.1, 4.8, 6.0, 5.5, 4.9, 5.3}, {4.9, 4.6, 5.6, 5.4, 4.8, 5.1},
       -4.472136, 0.006566},
      // Larger paired sample, n = 12.
      {{14, 17, 12, 15, 16, 13, 18, 14, 15, 16, 12, 17},
       {15, 18, 14, 15, 17, 15, 19, 14, 16, 18, 13, 18},
       5.613241, 0.000157},
  };

  for (const auto& d : datasets) {
    const PairedTTest r = paired_t_test(d.a, d.b);
    CHECK(r.t == doctest::Approx(d.t).epsilon(1e-4));
    CHECK(std::abs(r.p - d.p) < 1e-3);
  }
}

TEST_CASE("paired_t_test: sign flip of all deltas flips t and preserves p") {
  const std::vector<double> a = {0, 0, 0, 0, 0};
  const std::vector<double> b = {1, 3, 2, 5, 4};
  const PairedTTest fwd = paired_t_test(a, b);
  const PairedTTest rev = paired_t_test(b, a);
  CHECK(fwd.t == doctest::Approx(-rev.t));
  CHECK(fwd.p == doctest::Approx(rev.p));
}

TEST_CASE("student_t_two_sided_p: symmetry and limiting behavior") {
  CHECK(student_t_two_sided_p(0.0, 10) == doctest::Approx(1.0));
  CHECK(student_t_two_sided_p(2.5, 10) == doctest::Approx(student_t_two_sided_p(-2.5, 10)));
  CHECK(student_t_two_sided_p(10.0, 10) < 1e-4);
  // Known quantile: t = 2.228 at dof 10 has two-sided p = 0.05.
  CHECK(std::abs(student_t_two_sided_p(2.228, 10) - 0.05) < 1e-3);
}

TEST_CASE("incomplete_beta: boundary values and symmetry identity") {
  CHECK(incomplete_beta(2.0, 3.0, 0.0) == doctest::Approx(0.0));
  CHECK(incomplete_beta(2.0, 3.0, 1.0) == doctest::Approx(1.0));
  // I_x(a, b) = 1 - I_{1-x}(b, a).
  const double x = 0.37;
  CHECK(incomplete_beta(2.5, 4.0, x) ==
        doctest::Approx(1.0 - incomplete_beta(4.0, 2.5, 1.0 - x)).epsilon(1e-10));
  // I_x(1, 1) = x.
  CHECK(incomplete_beta(1.0, 1.0, 0.7) == doctest::Approx(0.7));
}

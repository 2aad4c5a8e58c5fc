#include "microgait/stats.hpp"

#include <cmath>
#include <limits>

namespace microgait {

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-14;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  // Use the symmetric form when the continued fraction converges faster.
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, int dof) {
  if (dof <= 0) return 1.0;
  const double x = dof / (dof + t * t);
  return incomplete_beta(dof / 2.0, 0.5, x);
}

PairedTTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw TooFewPairs("paired samples differ in length");
  const int n = static_cast<int>(a.size());
  if (n < 2) throw TooFewPairs("need at least two pairs");

  PairedTTest out;
  out.dof = n - 1;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += b[i] - a[i];
  out.mean_delta = sum / n;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = (b[i] - a[i]) - out.mean_delta;
    ss += e * e;
  }
  out.sd_delta = std::sqrt(ss / (n - 1));

  if (out.sd_delta == 0.0) {
    if (out.mean_delta == 0.0) {
      out.t = 0.0;
      out.p = 1.0;
    } else {
      // Identical nonzero shift in every pair: beyond-threshold significance.
      out.t = std::copysign(std::numeric_limits<double>::infinity(), out.mean_delta);
      out.p = 0.0;
    }
    return out;
  }
  out.t = out.mean_delta * std::sqrt(static_cast<double>(n)) / out.sd_delta;
  out.p = student_t_two_sided_p(out.t, out.dof);
  return out;
}

}  // namespace microgait

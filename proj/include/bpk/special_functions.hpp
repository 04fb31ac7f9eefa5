#pragma once

#include <cstddef>

namespace bpk {

/// log B(a, b) via log-Gamma; a, b > 0.
double log_beta(double a, double b);
double beta(double a, double b);

/// log of the binomial coefficient C(n, k) for real n >= k >= 0.
double log_binomial(double n, double k);

struct MittagLefflerValue {
  double value = 0.0;
  bool overflow = false;  ///< true when the sum exceeds double range; value is +inf
  std::size_t terms = 0;
};

/// E_a(x) = sum_{k>=1} x^k / Gamma(a k + 1), the Mittag-Leffler series
/// without its k = 0 term. Summation stops once the terms are decreasing and
/// the next one is below tol times the running sum.
MittagLefflerValue mittag_leffler(double a, double x, double tol = 1e-17,
                                  std::size_t max_terms = 1000000);

/// Convenience wrapper returning +inf on overflow.
double mittag_leffler_value(double a, double x, double tol = 1e-17);

}  // namespace bpk

#include "bpk/special_functions.hpp"

#include <cfloat>
#include <cmath>
#include <limits>

#include "bpk/errors.hpp"

namespace bpk {

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta function needs positive arguments");
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double beta(double a, double b) { return std::exp(log_beta(a, b)); }

double log_binomial(double n, double k) {
  if (k < 0.0 || k > n) throw DomainError("binomial needs 0 <= k <= n");
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

MittagLefflerValue mittag_leffler(double a, double x, double tol, std::size_t max_terms) {
  if (!(a > 0.0)) throw DomainError("Mittag-Leffler order must be positive");
  if (!(x >= 0.0)) throw DomainError("Mittag-Leffler argument must be nonnegative");
  MittagLefflerValue out;
  if (x == 0.0) return out;
  if (std::isinf(x)) {
    out.value = std::numeric_limits<double>::infinity();
    out.overflow = true;
    return out;
  }
  const double lx = std::log(x);
  const double lmax = std::log(DBL_MAX);
  long double sum = 0.0L;
  double prev = 0.0;
  for (std::size_t k = 1; k <= max_terms; ++k) {
    const double kk = static_cast<double>(k);
    const double lt = kk * lx - std::lgamma(a * kk + 1.0);
    if (lt > lmax) {
      out.value = std::numeric_limits<double>::infinity();
      out.overflow = true;
      out.terms = k;
      return out;
    }
    const double term = std::exp(lt);
    sum += term;
    out.terms = k;
    if (!std::isfinite(static_cast<double>(sum))) {
      out.value = std::numeric_limits<double>::infinity();
      out.overflow = true;
      return out;
    }
    if (k > 1 && term < prev && term < tol * static_cast<double>(sum)) break;
    prev = term;
  }
  out.value = static_cast<double>(sum);
  return out;
}

double mittag_leffler_value(double a, double x, double tol) {
  return mittag_leffler(a, x, tol).value;
}

}  // namespace bpk

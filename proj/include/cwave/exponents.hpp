// Exact exponent algebra for the defocusing subcritical wave equation.
//
// Everything here is rational arithmetic; no floating point enters the
// identities.  The admissible (d, p) range is 1 + 6/d < p < 1 + 4/(d-2),
// d in {3, 4, 5}.

#ifndef CWAVE_EXPONENTS_HPP
#define CWAVE_EXPONENTS_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/rational.hpp>

namespace cwave {

// Compare against Rational(n), never a bare integer: with Boost 1.74 under
// C++20 the rewritten `rational == int` candidate recurses forever.
using Rational = boost::rational<std::int64_t>;

Rational parse_rational(std::string_view text);
std::string to_string(const Rational& x);
double to_double(const Rational& x);
/// Continued-fraction approximation of x with denominator <= max_den.
Rational nearest_rational(double x, std::int64_t max_den = 10000);

// Raised when (d, p) leaves the range the exponent formulas are valid on.
// The message names the violated bound.
class HypothesisError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Lebesgue exponent in [1, +inf].  Only the reciprocal is used in the
// Strichartz conditions, so +inf is simply reciprocal 0.
class Exponent {
 public:
  Exponent(Rational value) : value_(value) {}  // NOLINT: implicit on purpose
  Exponent(std::int64_t value) : value_(value) {}  // NOLINT
  static Exponent infinity() { return Exponent(); }

  bool is_infinite() const { return infinite_; }
  Rational value() const;
  Rational reciprocal() const { return infinite_ ? Rational(0) : 1 / value_; }
  std::string str() const { return infinite_ ? "inf" : to_string(value_); }

 private:
  Exponent() : value_(0), infinite_(true) {}
  Rational value_;
  bool infinite_ = false;
};

struct ExponentTable {
  int d = 0;
  Rational p;
  Rational p_e;
  Rational s_p;
  Rational q;
  Rational r;
  Rational k1;
  Rational k2;
  Rational kappa1;
  Rational kappa2;
};

struct AdmissibilityReport {
  bool admissible = true;
  std::vector<std::string> failures;
  explicit operator bool() const { return admissible; }
};

struct KappaBounds {
  // nullopt when the denominator (d-1)(d+3) - (d+1)(d-3)p vanishes.
  std::optional<Rational> kappa1;
  Rational kappa2;
};

/// p_e = 1 + 4/(d-2).  Throws std::domain_error for d < 3.
Rational critical_exponent(int d);

/// s_p = d/2 - 2/(p-1).  Throws std::domain_error for p <= 1.
Rational critical_sobolev(int d, const Rational& p);

/// The 1-admissible pair (q, r) and Holder weights (k1, k2) that put
/// (1/(p+1), 1/(p+1)), (1/q, 1/r) and (1/p, 1/(2p)) on one line.
/// Requires d in {3,4,5} and 1 + 6/d < p < p_e; throws HypothesisError otherwise.
ExponentTable lemma_pair(int d, const Rational& p);

/// Strichartz s-admissibility (no derivative shift): q, r >= 2, r finite,
/// 2/q + (d-1)/r <= (d-1)/2, 1/q + d/r = d/2 - s and (q, r) != (2, 2(d-1)/(d-3)).
AdmissibilityReport check_admissible(int d, const Exponent& q, const Exponent& r,
                                     const Rational& s);

/// Weighted-energy thresholds: kappa1 (non-radial) and kappa2 (radial).
/// Defined for 1 < p <= p_e.
KappaBounds kappa_bounds(int d, const Rational& p);

/// Collinearity of the three Holder points plus the three weight identities.
bool holder_check(const ExponentTable& table);

/// Every invariant of a table that fails, as human-readable strings.
std::vector<std::string> table_violations(const ExponentTable& table);

/// `count` rationals evenly spaced strictly inside (1 + 6/d, p_e).
std::vector<Rational> p_lattice(int d, int count);

}  // namespace cwave

#endif  // CWAVE_EXPONENTS_HPP

#include "cwave/exponents.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace cwave {

namespace {

std::int64_t parse_int(std::string_view text)
{
  std::int64_t value = 0;
  auto first = text.data();
  auto last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last)
    throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
  return value;
}

void require_dimension(int d)
{
  if (d < 3 || d > 5)
    throw HypothesisError("d must lie in {3,4,5}, got " + std::to_string(d));
}

}  // namespace

Rational parse_rational(std::string_view text)
{
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_int(text));
  std::int64_t num = parse_int(text.substr(0, slash));
  std::int64_t den = parse_int(text.substr(slash + 1));
  if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
  return Rational(num, den);
}

std::string to_string(const Rational& x)
{
  if (x.denominator() == 1) return std::to_string(x.numerator());
  return std::to_string(x.numerator()) + "/" + std::to_string(x.denominator());
}

double to_double(const Rational& x)
{
  return static_cast<double>(x.numerator()) / static_cast<double>(x.denominator());
}

Rational nearest_rational(double x, std::int64_t max_den)
{
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite value has no rational approximation");
  // convergents h/k of the continued fraction of x
  std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double y = x;
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(y);
    const auto ai = static_cast<std::int64_t>(a);
    const std::int64_t k2 = ai * k1 + k0;
    if (k2 > max_den) break;
    const std::int64_t h2 = ai * h1 + h0;
    h0 = h1, h1 = h2, k0 = k1, k1 = k2;
    if (std::abs(y - a) < 1e-12 || std::abs(static_cast<double>(h1) / k1 - x) < 1e-15 * std::max(1.0, std::abs(x))) break;
    y = 1.0 / (y - a);
  }
  return Rational(h1, k1);
}

Rational Exponent::value() const
{
  if (infinite_) throw std::domain_error("infinite exponent has no rational value");
  return value_;
}

Rational critical_exponent(int d)
{
  if (d < 3) throw std::domain_error("critical exponent needs d >= 3, got " + std::to_string(d));
  return 1 + Rational(4, d - 2);
}

Rational critical_sobolev(int d, const Rational& p)
{
  if (p <= 1) throw std::domain_error("s_p needs p > 1, got p = " + to_string(p));
  return Rational(d, 2) - 2 / (p - 1);
}

ExponentTable lemma_pair(int d, const Rational& p)
{
  require_dimension(d);
  const Rational lower = 1 + Rational(6, d);
  const Rational p_e = critical_exponent(d);
  if (p <= lower)
    throw HypothesisError("p must exceed 1+6/d = " + to_string(lower) + ", got " + to_string(p));
  if (p >= p_e)
    throw HypothesisError("p must be below p_e = 1+4/(d-2) = " + to_string(p_e) + ", got " +
                          to_string(p));

  ExponentTable t;
  t.d = d;
  t.p = p;
  t.p_e = p_e;
  t.s_p = critical_sobolev(d, p);

  const Rational span = d * p - d - 2;      // dp - d - 2
  const Rational gap = d + 2 + 2 * p - d * p;  // d + 2 + 2p - dp
  t.q = span / 2;
  t.r = 2 * span / (d * p - 2 * p - d);
  t.k1 = (p + 1) * gap / (gap + 2);
  t.k2 = span / (gap + 2);

  auto kappa = kappa_bounds(d, p);
  t.kappa1 = *kappa.kappa1;  // never undefined on the admissible range
  t.kappa2 = kappa.kappa2;
  return t;
}

AdmissibilityReport check_admissible(int d, const Exponent& q, const Exponent& r,
                                     const Rational& s)
{
  AdmissibilityReport report;
  auto fail = [&report](std::string why) {
    report.admissible = false;
    report.failures.push_back(std::move(why));
  };

  if (!q.is_infinite() && q.value() < 2) fail("q must be >= 2, got " + q.str());
  if (r.is_infinite()) {
    fail("r must be finite");
  } else if (r.value() < 2) {
    fail("r must be >= 2, got " + r.str());
  }

  const Rational iq = q.reciprocal();
  const Rational ir = r.reciprocal();
  if (2 * iq + (d - 1) * ir > Rational(d - 1, 2))
    fail("2/q + (d-1)/r = " + to_string(2 * iq + (d - 1) * ir) + " exceeds (d-1)/2 = " +
         to_string(Rational(d - 1, 2)));
  const Rational scaling = iq + d * ir;
  const Rational target = Rational(d, 2) - s;
  if (scaling != target)
    fail("1/q + d/r = " + to_string(scaling) + " differs from d/2 - s = " + to_string(target));

  // For d = 3 the excluded endpoint has r = inf, already rejected above.
  if (d > 3 && !q.is_infinite() && !r.is_infinite() && q.value() == Rational(2) &&
      r.value() == Rational(2 * (d - 1), d - 3))
    fail("(q,r) = (2, 2(d-1)/(d-3)) is the excluded endpoint pair");
  return report;
}

KappaBounds kappa_bounds(int d, const Rational& p)
{
  if (d < 3) throw std::domain_error("kappa bounds need d >= 3, got " + std::to_string(d));
  if (p <= 1 || p > critical_exponent(d))
    throw HypothesisError("kappa bounds need 1 < p <= p_e = " + to_string(critical_exponent(d)) +
                          ", got " + to_string(p));
  KappaBounds k;
  const Rational num1 = Rational((d + 2) * (d + 3)) - (d + 3) * (d - 2) * p;
  const Rational den1 = Rational((d - 1) * (d + 3)) - (d + 1) * (d - 3) * p;
  if (den1 != Rational(0)) k.kappa1 = num1 / den1;
  k.kappa2 = (4 - (d - 2) * (p - 1)) / (p + 1);
  return k;
}

bool holder_check(const ExponentTable& t)
{
  const Rational a1 = 1 / (t.p + 1);
  const Rational x2 = 1 / t.q, y2 = 1 / t.r;
  const Rational x3 = 1 / t.p, y3 = 1 / (2 * t.p);
  const Rational cross = (x2 - a1) * (y3 - a1) - (y2 - a1) * (x3 - a1);
  if (cross != Rational(0)) return false;
  if (t.k1 + t.k2 != t.p) return false;
  if (t.k1 * a1 + t.k2 / t.q != Rational(1)) return false;
  if (t.k1 * a1 + t.k2 / t.r != Rational(1, 2)) return false;
  return true;
}

std::vector<std::string> table_violations(const ExponentTable& t)
{
  std::vector<std::string> out;
  auto check = [&out](bool ok, const std::string& what) {
    if (!ok) out.push_back(what);
  };
  check(t.p_e == critical_exponent(t.d), "p_e != 1 + 4/(d-2)");
  check(t.s_p == critical_sobolev(t.d, t.p), "s_p != d/2 - 2/(p-1)");
  check(t.p > 1 + Rational(6, t.d) && t.p < t.p_e, "p outside (1+6/d, p_e)");
  check(t.k1 > 0 && t.k2 > 0, "k1, k2 must be positive");
  check(t.k1 + t.k2 == t.p, "k1 + k2 != p");
  check(t.k1 / (t.p + 1) + t.k2 / t.q == Rational(1), "k1/(p+1) + k2/q != 1");
  check(t.k1 / (t.p + 1) + t.k2 / t.r == Rational(1, 2), "k1/(p+1) + k2/r != 1/2");
  auto adm = check_admissible(t.d, t.q, t.r, 1);
  for (auto& f : adm.failures) out.push_back("admissibility: " + f);
  check(t.kappa1 > 0 && t.kappa2 > 0, "kappa values must be positive");
  return out;
}

std::vector<Rational> p_lattice(int d, int count)
{
  require_dimension(d);
  if (count < 1) throw std::invalid_argument("lattice needs at least one point");
  const Rational lo = 1 + Rational(6, d);
  const Rational hi = critical_exponent(d);
  std::vector<Rational> ps;
  ps.reserve(count);
  for (int k = 1; k <= count; ++k) ps.push_back(lo + (hi - lo) * Rational(k, count + 1));
  return ps;
}

}  // namespace cwave

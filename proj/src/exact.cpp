#include "imbal/exact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "imbal/errors.hpp"

namespace imbal::exact {

Integer binomial(long long n, long long k) {
  if (n < 0 || k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  Integer acc = 1;
  for (long long t = 1; t <= k; ++t) {
    acc *= (n - k + t);
    acc /= t;
  }
  return acc;
}

Rational to_rational(double x) {
  int exponent = 0;
  const double mantissa = std::frexp(x, &exponent);
  // 53 bits of mantissa are exact as an integer.
  const auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
  Rational r(scaled);
  exponent -= 53;
  Integer pow2 = 1;
  pow2 <<= std::abs(exponent);
  if (exponent >= 0) {
    r *= Rational(pow2);
  } else {
    r /= Rational(pow2);
  }
  return r;
}

namespace {

Integer ceil_of(const Rational& r) {
  const Integer num = boost::multiprecision::numerator(r);
  const Integer den = boost::multiprecision::denominator(r);
  Integer q = num / den;
  if (q * den < num) ++q;
  return q;
}

}  // namespace

StayPair stay_probabilities(const ModelParams& params, int i) {
  params.validate();
  if (i < 0 || i > params.n) throw InvalidParameter("level outside 0..N");
  const int n = params.n;
  const int d = params.d;
  StayPair out{Rational(0), Rational(0)};
  const Rational distance = to_rational(params.alpha) * Rational(std::abs(2 * i - n)) / Rational(2 * n);
  if (distance > Rational(d)) return out;
  const int c = static_cast<int>(ceil_of(distance));
  const Integer total = binomial(n - 1, 2 * d);
  Integer plus = 0;
  for (int j = std::max(d + c, i + 2 * d - n); j <= std::min(2 * d, i); ++j) {
    plus += binomial(i - 1, j) * binomial(n - i, 2 * d - j);
  }
  Integer minus = 0;
  for (int j = std::max(0, i + 2 * d - n); j <= std::min(d - c, i); ++j) {
    minus += binomial(i, j) * binomial(n - i - 1, 2 * d - j);
  }
  out.plus = Rational(plus, total);
  out.minus = Rational(minus, total);
  return out;
}

}  // namespace imbal::exact

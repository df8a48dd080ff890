#ifndef IMBAL_EXACT_HPP
#define IMBAL_EXACT_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include "imbal/params.hpp"

namespace imbal::exact {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// C(n, k), zero for k outside [0, n] or n < 0.
Integer binomial(long long n, long long k);

// The double alpha as the exact binary rational it represents.
Rational to_rational(double x);

struct StayPair {
  Rational plus;
  Rational minus;
};

// Closed-form frozen-phase stay probabilities with c and the band decided
// in exact arithmetic.
StayPair stay_probabilities(const ModelParams& params, int i);

}  // namespace imbal::exact

#endif  // IMBAL_EXACT_HPP

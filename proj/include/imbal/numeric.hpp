#ifndef IMBAL_NUMERIC_HPP
#define IMBAL_NUMERIC_HPP

#include <span>

namespace imbal::numeric {

// log(sum_i exp(x_i)); -inf entries contribute nothing. Empty or all -inf
// input yields -inf.
double log_sum_exp(std::span<const double> x);

// log C(n, k) via lgamma; -inf when k is outside [0, n].
double log_binomial(long long n, long long k);

}  // namespace imbal::numeric

#endif  // IMBAL_NUMERIC_HPP

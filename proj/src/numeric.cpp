#include "imbal/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace imbal::numeric {

double log_sum_exp(std::span<const double> x) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (x.empty()) return kNegInf;
  const double top = *std::max_element(x.begin(), x.end());
  if (top == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - top);
  return top + std::log(sum);
}

double log_binomial(long long n, long long k) {
  if (k < 0 || n < 0 || k > n) return -std::numeric_limits<double>::infinity();
  if (k == 0 || k == n) return 0.0;
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace imbal::numeric

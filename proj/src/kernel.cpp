#include "imbal/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "imbal/errors.hpp"
#include "imbal/numeric.hpp"

namespace imbal {
namespace {

// log C(n,k). Short products are exact to a few ulps; lgamma is used only
// when both k and n-k are large.
double log_choose(long long n, long long k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  const long long m = std::min(k, n - k);
  if (m <= 32) {
    double acc = 0.0;
    for (long long t = 1; t <= m; ++t) {
      acc += std::log(static_cast<double>(n - m + t) / static_cast<double>(t));
    }
    return acc;
  }
  return numeric::log_binomial(n, k);
}

// Slack absorbs rounding of alpha*|2i-N|/(2N) when the exact value is an
// integer; the rational backend does not need it.
constexpr double kCeilSlack = 1e-9;

}  // namespace

double hypergeom_pmf(long long population, long long successes, long long draws, long long k) {
  if (population < 0 || successes < 0 || draws < 0 || k < 0) {
    throw InvalidParameter("hypergeom_pmf: negative argument");
  }
  if (successes > population || draws > population) {
    throw InvalidParameter("hypergeom_pmf: successes and draws must not exceed population (" +
                           std::to_string(successes) + ", " + std::to_string(draws) + " > " +
                           std::to_string(population) + ")");
  }
  const long long failures = population - successes;
  if (k > successes || k > draws || draws - k > failures) return 0.0;
  const double lp = log_choose(successes, k) + log_choose(failures, draws - k) -
                    log_choose(population, draws);
  return std::exp(lp);
}

StayRanges stay_ranges(const ModelParams& params, int i) {
  const int n = params.n;
  const int d = params.d;
  const double spread = static_cast<double>(std::abs(2 * i - n));
  StayRanges r;
  r.in_band = params.alpha * spread <= 2.0 * d * n;
  if (!r.in_band) return r;
  r.c = static_cast<int>(std::ceil(params.alpha * spread / (2.0 * n) - kCeilSlack));
  r.plus_lo = std::max(d + r.c, i + 2 * d - n);
  r.plus_hi = std::min(2 * d, i);
  r.minus_lo = std::max(0, i + 2 * d - n);
  r.minus_hi = std::min(d - r.c, i);
  return r;
}

StayPair stay_probabilities(const ModelParams& params, int i) {
  params.validate();
  if (i < 0 || i > params.n) throw InvalidParameter("level outside 0..N");
  const StayRanges r = stay_ranges(params, i);
  StayPair out;
  if (!r.in_band) return out;
  const long long others = params.n - 1;
  const long long draws = params.neighbours();
  // f_+(i,j): j buyers among the 2d neighbours of a buyer (i-1 other buyers).
  if (i >= 1) {
    for (int j = r.plus_lo; j <= r.plus_hi; ++j) out.plus += hypergeom_pmf(others, i - 1, draws, j);
  }
  // f_-(i,j): j buyers among the neighbours of a seller (i other buyers).
  if (i <= others) {
    for (int j = r.minus_lo; j <= r.minus_hi; ++j) out.minus += hypergeom_pmf(others, i, draws, j);
  }
  out.plus = std::clamp(out.plus, 0.0, 1.0);
  out.minus = std::clamp(out.minus, 0.0, 1.0);
  return out;
}

namespace {

LevelProbs compose(int n, int i, double stay_plus, double stay_minus) {
  const double buyers = static_cast<double>(i) / n;
  const double sellers = static_cast<double>(n - i) / n;
  return LevelProbs{buyers * stay_plus, buyers * (1.0 - stay_plus), sellers * stay_minus,
                    sellers * (1.0 - stay_minus)};
}

}  // namespace

LevelProbs level_transition_probs(const ModelParams& params, int i) {
  const StayPair s = stay_probabilities(params, i);
  return compose(params.n, i, s.plus, s.minus);
}

double expected_imbalance_impact(const ModelParams& params, int i) {
  const LevelProbs p = level_transition_probs(params, i);
  return p.mp + params.gamma * p.pm;
}

TransitionKernel::TransitionKernel(const ModelParams& params) : params_(params) {
  params_.validate();
  const int levels = params_.n + 1;
  stay_plus_.resize(levels);
  stay_minus_.resize(levels);
  e_plus_.resize(levels);
  for (int i = 0; i < levels; ++i) {
    const StayPair s = stay_probabilities(params_, i);
    stay_plus_[i] = s.plus;
    stay_minus_[i] = s.minus;
    const LevelProbs p = compose(params_.n, i, s.plus, s.minus);
    e_plus_[i] = p.mp + params_.gamma * p.pm;
  }
}

LevelProbs TransitionKernel::probs(int i) const {
  return compose(params_.n, i, stay_plus_.at(i), stay_minus_.at(i));
}

}  // namespace imbal

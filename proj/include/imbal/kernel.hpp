#ifndef IMBAL_KERNEL_HPP
#define IMBAL_KERNEL_HPP

#include <span>
#include <vector>

#include "imbal/params.hpp"

namespace imbal {

// C(successes,k) C(population-successes,draws-k) / C(population,draws).
// Zero outside the support. Throws InvalidParameter when successes or draws
// exceed the population or any argument is negative.
double hypergeom_pmf(long long population, long long successes, long long draws, long long k);

// Summation limits of the frozen-phase stay probabilities at level i.
// An empty range has lo > hi.
struct StayRanges {
  bool in_band = false;
  int c = 0;
  int plus_lo = 1, plus_hi = 0;
  int minus_lo = 1, minus_hi = 0;
};

StayRanges stay_ranges(const ModelParams& params, int i);

struct StayPair {
  double plus = 0.0;   // P̄_++(i): a buyer keeps its spin
  double minus = 0.0;  // P̄_--(i): a seller keeps its spin
};

StayPair stay_probabilities(const ModelParams& params, int i);

// One-step law of the imbalance chain at level i (q = 1, frozen phase).
// pp + pm + mm + mp == 1.
struct LevelProbs {
  double pp = 0.0;
  double pm = 0.0;
  double mm = 0.0;
  double mp = 0.0;
};

LevelProbs level_transition_probs(const ModelParams& params, int i);

// E_+(i) = P_-+(i) + gamma P_+-(i).
double expected_imbalance_impact(const ModelParams& params, int i);

// Frozen-phase kernel tabulated over levels 0..N. Immutable once built.
class TransitionKernel {
 public:
  explicit TransitionKernel(const ModelParams& params);

  const ModelParams& params() const noexcept { return params_; }
  int n() const noexcept { return params_.n; }
  int levels() const noexcept { return params_.n + 1; }

  double stay_plus(int i) const { return stay_plus_.at(i); }
  double stay_minus(int i) const { return stay_minus_.at(i); }
  double e_plus(int i) const { return e_plus_.at(i); }
  LevelProbs probs(int i) const;

  std::span<const double> stay_plus() const noexcept { return stay_plus_; }
  std::span<const double> stay_minus() const noexcept { return stay_minus_; }
  std::span<const double> e_plus() const noexcept { return e_plus_; }

 private:
  ModelParams params_;
  std::vector<double> stay_plus_;
  std::vector<double> stay_minus_;
  std::vector<double> e_plus_;
};

}  // namespace imbal

#endif  // IMBAL_KERNEL_HPP

#include "imbal/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "imbal/errors.hpp"
#include "imbal/numeric.hpp"

namespace imbal {

const std::vector<double>& InvariantMeasure::probabilities() const {
  if (!exists) throw NoInvariantMeasure("no invariant measure: A3 is non-empty");
  return pi;
}

InvariantMeasure invariant_measure(const TransitionKernel& kernel,
                                   const Classification& classification,
                                   std::span<const int> a2_signs) {
  InvariantMeasure m;
  m.params = kernel.params();
  m.a2_levels = classification.levels_in(Attractor::A2);
  m.unique = m.a2_levels.empty();
  if (classification.any(Attractor::A3)) {
    m.exists = false;
    return m;
  }
  const std::vector<int> spin = strategic_spins(classification, a2_signs);
  m.a2_signs.assign(a2_signs.begin(), a2_signs.end());

  const int n = kernel.n();
  const double q = m.params.q;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  m.log_g.assign(n + 1, 0.0);
  double acc = 0.0;
  for (int l = 1; l <= n; ++l) {
    const int j = l - 1;
    const double up = 1.0 - q * kernel.stay_minus(j) - (1.0 - q) * (spin[j] == -1 ? 1.0 : 0.0);
    const double down = 1.0 - q * kernel.stay_plus(j + 1) - (1.0 - q) * (spin[j + 1] == 1 ? 1.0 : 0.0);
    if (down < kDegenerateTolerance) {
      throw DegenerateChain("level " + std::to_string(j + 1) + " cannot step down; product form undefined",
                            j + 1);
    }
    acc += (up <= 0.0 ? kNegInf : std::log(up)) - std::log(down);
    m.log_g[l] = numeric::log_binomial(n, l) + acc;
  }
  m.log_norm = numeric::log_sum_exp(m.log_g);
  m.pi.resize(n + 1);
  for (int l = 0; l <= n; ++l) m.pi[l] = std::exp(m.log_g[l] - m.log_norm);
  m.exists = true;
  return m;
}

std::vector<int> branch_signs(std::size_t a2_count, unsigned long long b) {
  std::vector<int> signs(a2_count);
  for (std::size_t k = 0; k < a2_count; ++k) signs[k] = ((b >> k) & 1ULL) ? -1 : 1;
  return signs;
}

std::vector<InvariantMeasure> all_branches(const TransitionKernel& kernel,
                                           const Classification& classification,
                                           int branch_cap) {
  const std::size_t k = classification.levels_in(Attractor::A2).size();
  if (static_cast<int>(k) > branch_cap) {
    throw BranchExplosion(std::to_string(k) + " A2 levels exceed the branch cap of " +
                          std::to_string(branch_cap));
  }
  std::vector<InvariantMeasure> out;
  const unsigned long long count = 1ULL << k;
  out.reserve(count);
  for (unsigned long long b = 0; b < count; ++b) {
    out.push_back(invariant_measure(kernel, classification, branch_signs(k, b)));
  }
  return out;
}

MeasureStats measure_stats(std::span<const double> pi) {
  MeasureStats s;
  const int top = static_cast<int>(pi.size()) - 1;
  if (top < 0) return s;
  const double peak = *std::max_element(pi.begin(), pi.end());
  const double floor = peak - kModeTieTolerance * std::abs(peak);
  s.global_mode = static_cast<int>(std::find_if(pi.begin(), pi.end(), [&](double v) { return v >= floor; }) -
                                   pi.begin());
  s.mode_tie = std::count_if(pi.begin(), pi.end(), [&](double v) { return v >= floor; }) > 1;
  const int lo = std::max(0, s.global_mode - 2);
  const int hi = std::min(top, s.global_mode + 2);
  for (int i = lo; i <= hi; ++i) s.mode_mass_5 += pi[i];
  s.mode_mass_5 = std::min(1.0, s.mode_mass_5);
  for (int i = 0; i <= top; ++i) {
    s.mean += i * pi[i];
    // Plateaus count once, at their lowest level.
    const bool left = i == 0 || pi[i] > pi[i - 1];
    const bool right = i == top || pi[i] >= pi[i + 1];
    if (left && right) s.mode_list.push_back(i);
  }
  return s;
}

MeasureStats measure_stats(const InvariantMeasure& measure) {
  return measure_stats(measure.probabilities());
}

}  // namespace imbal

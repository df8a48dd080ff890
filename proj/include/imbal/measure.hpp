#ifndef IMBAL_MEASURE_HPP
#define IMBAL_MEASURE_HPP

#include <span>
#include <vector>

#include "imbal/attractors.hpp"
#include "imbal/kernel.hpp"

namespace imbal {

// A downward factor below this makes the product form meaningless.
inline constexpr double kDegenerateTolerance = 1e-13;

inline constexpr int kDefaultBranchCap = 20;
// Levels whose mass is within this relative distance of the peak tie for
// the global mode.
inline constexpr double kModeTieTolerance = 1e-12;

// One branch of the invariant law of N+ over levels 0..N.
struct InvariantMeasure {
  ModelParams params;
  bool exists = false;
  bool unique = false;
  std::vector<int> a2_levels;   // ascending
  std::vector<int> a2_signs;    // aligned with a2_levels
  std::vector<double> pi;       // empty when !exists
  std::vector<double> log_g;    // log g(l), g(0) = 1
  double log_norm = 0.0;        // log(1 + Z(N))

  // Throws NoInvariantMeasure when the measure does not exist.
  const std::vector<double>& probabilities() const;
};

// Product-form invariant measure for one assignment of the A2 levels.
// Returns exists = false when A3 is non-empty. Throws DegenerateChain when
// a denominator factor falls below kDegenerateTolerance.
InvariantMeasure invariant_measure(const TransitionKernel& kernel,
                                   const Classification& classification,
                                   std::span<const int> a2_signs);

// One measure per +-1 assignment of A2, in binary counting order: branch b
// assigns -1 to the m-th A2 level iff bit m of b is set.
std::vector<InvariantMeasure> all_branches(const TransitionKernel& kernel,
                                           const Classification& classification,
                                           int branch_cap = kDefaultBranchCap);

// A2 assignment for branch index b (see all_branches).
std::vector<int> branch_signs(std::size_t a2_count, unsigned long long b);

struct MeasureStats {
  int global_mode = 0;
  bool mode_tie = false;  // several levels share the maximum
  double mode_mass_5 = 0.0;
  double mean = 0.0;
  std::vector<int> mode_list;
};

MeasureStats measure_stats(std::span<const double> pi);
MeasureStats measure_stats(const InvariantMeasure& measure);

}  // namespace imbal

#endif  // IMBAL_MEASURE_HPP

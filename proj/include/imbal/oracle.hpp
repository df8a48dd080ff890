#ifndef IMBAL_ORACLE_HPP
#define IMBAL_ORACLE_HPP

#include <span>
#include <utility>
#include <vector>

#include "imbal/attractors.hpp"
#include "imbal/exact.hpp"
#include "imbal/kernel.hpp"

namespace imbal::oracle {

// Explicit embedded chain of N+ on 0..N under the frozen-phase dynamics
// with the expectation spins settled.
struct BirthDeathChain {
  std::vector<double> up;
  std::vector<double> down;
  std::vector<double> stay;

  int n() const noexcept { return static_cast<int>(up.size()) - 1; }
};

// Rates below this are treated as structural zeros.
inline constexpr double kZeroRate = 1e-13;

// Throws NoInvariantMeasure when A3 is non-empty.
BirthDeathChain build_chain(const TransitionKernel& kernel, const Classification& classification,
                            std::span<const int> a2_signs);

struct StationaryResult {
  // Closed communicating classes as inclusive level intervals.
  std::vector<std::pair<int, int>> closed_classes;
  // Stationary vector over 0..N when exactly one closed class exists;
  // empty otherwise.
  std::vector<double> pi;
  bool reducible = false;

  bool unique() const noexcept { return closed_classes.size() == 1; }
};

inline constexpr int kMaxDenseLevels = 2048;

// Dense solve of pi T = pi, sum pi = 1 on the closed class.
StationaryResult stationary_solve(const BirthDeathChain& chain);

// Stay probabilities by brute force over every 2d-subset of the other N-1
// sites, for N <= 12.
exact::StayPair enumerate_flip_probs(int n, int d, double alpha, int i);

}  // namespace imbal::oracle

#endif  // IMBAL_ORACLE_HPP

#ifndef IMBAL_ATTRACTORS_HPP
#define IMBAL_ATTRACTORS_HPP

#include <span>
#include <string_view>
#include <vector>

#include "imbal/kernel.hpp"
#include "imbal/params.hpp"

namespace imbal {

// Absolute tolerance on the B/C comparison residuals.
inline constexpr double kTieTolerance = 1e-12;

enum class Attractor { A1, A2, A3, A4 };

std::string_view to_string(Attractor a) noexcept;

// B threshold (1 - 1/q)(1 - i/N) and C threshold (1 - 1/q)(i/N).
double b_threshold(double q, int n, int i) noexcept;
double c_threshold(double q, int n, int i) noexcept;

struct Classification {
  ModelParams params;
  std::vector<bool> in_b;
  std::vector<bool> in_c;
  std::vector<Attractor> cls;

  int levels() const noexcept { return static_cast<int>(cls.size()); }
  std::vector<int> levels_in(Attractor a) const;
  bool any(Attractor a) const;
};

Classification classify(const TransitionKernel& kernel);

// Long-run behaviour of the expectation spin at one level.
struct Eta2Steady {
  enum class Kind { Plus, Minus, Frozen, Oscillating };
  Kind kind = Kind::Plus;
  int initial = 0;  // the frozen value for Kind::Frozen, 0 otherwise

  // Settled value, or 0 for an oscillating level.
  int value() const noexcept;
  friend bool operator==(const Eta2Steady&, const Eta2Steady&) = default;
};

// initial_eta2 holds +1/-1 per level (0..N).
std::vector<Eta2Steady> eta2_steady(const Classification& classification,
                                    std::span<const int> initial_eta2);

// Frozen-phase strategic spin per level: +1 on A1 and on A2 levels
// assigned +1, -1 on A4 and on A2 levels assigned -1, 0 on A3.
// a2_signs lists the A2 assignment in ascending level order.
std::vector<int> strategic_spins(const Classification& classification,
                                 std::span<const int> a2_signs);

// Finite-beta flip law of the expectation spin at level i: the probability
// that a level holding a moves to b. Ties go to staying.
double lambda_finite_beta(const ModelParams& params, int i, int a, int b);

}  // namespace imbal

#endif  // IMBAL_ATTRACTORS_HPP

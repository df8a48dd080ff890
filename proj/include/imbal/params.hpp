#ifndef IMBAL_PARAMS_HPP
#define IMBAL_PARAMS_HPP

#include <limits>
#include <string>

namespace imbal {

inline constexpr double kInfiniteBeta = std::numeric_limits<double>::infinity();

// Scalar parameters of the two-dimensional spin market.
//   n      number of agents (lattice sites)
//   d      lattice dimension; every agent samples 2d neighbours
//   alpha  coupling between the local field and the global imbalance
//   gamma  f(-1,N)/f(1,N), the seller/buyer impact ratio, in [-1, 0)
//   q      probability that a move follows the Hamiltonian (heat-bath) rule
//   beta   inverse temperature; kInfiniteBeta selects the frozen phase
struct ModelParams {
  int n = 128;
  int d = 2;
  double alpha = 5.0;
  double gamma = -0.9;
  double q = 1.0;
  double beta = kInfiniteBeta;

  bool frozen() const noexcept { return beta == kInfiniteBeta; }
  int neighbours() const noexcept { return 2 * d; }

  // Throws InvalidParameter naming the first violated invariant.
  void validate() const;

  std::string to_string() const;
};

}  // namespace imbal

#endif  // IMBAL_PARAMS_HPP

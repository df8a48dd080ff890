#ifndef IMBAL_WEALTH_HPP
#define IMBAL_WEALTH_HPP

#include <span>
#include <vector>

#include "imbal/kernel.hpp"
#include "imbal/measure.hpp"

namespace imbal {

// Price impact f(x, N) for a one-step imbalance x in {-1, 0, 1}:
// f(1) = f_plus, f(-1) = gamma f_plus, f(0) = 0.
struct ImpactFunction {
  double f_plus = 1.0;
  double gamma = -0.9;

  double operator()(int x) const noexcept {
    return x > 0 ? f_plus : (x < 0 ? gamma * f_plus : 0.0);
  }
  void validate() const;
};

// Expected one-step wealth change of an agent holding `spin` at level i.
double agent_expected_increment(const TransitionKernel& kernel, const ImpactFunction& impact,
                                double price, int i, int spin);

// Expected one-step change of aggregate market wealth at level i.
double market_expected_increment(const TransitionKernel& kernel, const ImpactFunction& impact,
                                 double price, int i);

// <dW_k> under an invariant measure, from g(l)/(1 + Z(N)).
double stationary_expected_increment(const InvariantMeasure& measure, const TransitionKernel& kernel,
                                     const ImpactFunction& impact, double price);

// Sum over l of pi(l) times market_expected_increment(l).
double weighted_expected_increment(std::span<const double> pi, const TransitionKernel& kernel,
                                   const ImpactFunction& impact, double price);

// Sign with the classification tolerance: values within tol of zero are 0.
int sign_of(double x, double tol) noexcept;

// M = sum over agents of sgn(expected own increment); zero-expectation
// agents count for neither side.
int majority_opinion(const TransitionKernel& kernel, const ImpactFunction& impact, double price, int i);

// Sign of market_expected_increment with a tolerance scaled to N.
int market_sign(const TransitionKernel& kernel, const ImpactFunction& impact, double price, int i);

struct LevelConflict {
  int level = 0;
  int market = 0;    // sign of the market increment
  int majority = 0;  // M
  bool disagreement = false;
};

struct CellConflicts {
  ModelParams params;
  std::vector<LevelConflict> levels;
  int disagreements = 0;
  // Counterexamples to: market < 0 => M <= 0.
  int supermartingale_violations = 0;
  // Counterexamples to: disagreement => market > 0.
  int disagreement_violations = 0;
};

struct ConflictReport {
  std::vector<CellConflicts> cells;
  int disagreements = 0;
  int violations = 0;
};

CellConflicts conflict_scan_cell(const TransitionKernel& kernel, const ImpactFunction& impact, double price);
ConflictReport conflict_scan(std::span<const ModelParams> grid, double f_plus, double price);

// Everything the sweeps report about one parameter cell.
struct CellResult {
  ModelParams params;
  bool exists = false;
  bool unique = false;
  // The product form broke down and the dense solve found no single closed
  // class; no measure is reported.
  bool degenerate = false;
  // The measure came from the dense solve rather than the product form.
  bool fallback = false;
  std::vector<int> a2_levels;
  std::vector<int> a3_levels;
  std::vector<int> best_branch;  // A2 signs of the branch maximising dW
  int branches = 0;
  double dw = 0.0;
  MeasureStats stats;
  int disagreements = 0;
};

CellResult evaluate_cell(const ModelParams& params, double f_plus, double price,
                         int branch_cap = kDefaultBranchCap);

struct QStarResult {
  bool found = false;  // at least one cell had a measure
  double q_star = 0.0;
  double dw_star = 0.0;
  bool unique = false;
  bool tie = false;
  std::vector<int> a2_levels;
  std::vector<int> branch;
  std::vector<double> skipped;  // q values with no usable measure
  std::vector<CellResult> cells;
};

// Picks q* from cells given in ascending q order; cells without a measure
// are listed as skipped.
QStarResult best_q(std::vector<CellResult> cells);

// Grid search over q; non-unique cells are maximised over branches and ties
// go to the smaller q.
QStarResult optimal_q(const ModelParams& base, std::span<const double> q_grid, double f_plus, double price,
                      int branch_cap = kDefaultBranchCap);

// q grid start, start+step, ... up to stop (inclusive within step/1000).
std::vector<double> make_grid(double start, double stop, double step);

}  // namespace imbal

#endif  // IMBAL_WEALTH_HPP

#include "imbal/wealth.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <limits>

#include "imbal/attractors.hpp"
#include "imbal/errors.hpp"
#include "imbal/oracle.hpp"

namespace imbal {

void ImpactFunction::validate() const {
  if (!(f_plus > 0.0) || !std::isfinite(f_plus)) throw InvalidParameter("f(1,N) must be positive");
  if (!(gamma >= -1.0 && gamma < 0.0)) throw InvalidParameter("gamma must lie in [-1, 0)");
}

namespace {

void check_impact(const TransitionKernel& kernel, const ImpactFunction& impact) {
  impact.validate();
  if (impact.gamma != kernel.params().gamma) {
    throw InvalidParameter("impact gamma differs from the model gamma");
  }
}

// -f(1,N) P (1 + 1/gamma); vanishes for symmetric impact.
double prefactor(const ImpactFunction& impact, double price) {
  return -impact.f_plus * price * (1.0 + 1.0 / impact.gamma);
}

double market_bracket(const TransitionKernel& kernel, int i) {
  const int n = kernel.n();
  const LevelProbs p = kernel.probs(i);
  return (2.0 * i - n + 1.0) * p.mp + kernel.params().gamma * (2.0 * i - n - 1.0) * p.pm;
}

}  // namespace

double agent_expected_increment(const TransitionKernel& kernel, const ImpactFunction& impact,
                                double price, int i, int spin) {
  check_impact(kernel, impact);
  if (spin != 1 && spin != -1) throw InvalidParameter("spin must be +1 or -1");
  const double n = kernel.n();
  return spin * prefactor(impact, price) * (1.0 - 1.0 / n) * kernel.e_plus(i);
}

double market_expected_increment(const TransitionKernel& kernel, const ImpactFunction& impact,
                                 double price, int i) {
  check_impact(kernel, impact);
  return prefactor(impact, price) * market_bracket(kernel, i);
}

double stationary_expected_increment(const InvariantMeasure& measure, const TransitionKernel& kernel,
                                     const ImpactFunction& impact, double price) {
  check_impact(kernel, impact);
  if (!measure.exists) throw NoInvariantMeasure("no invariant measure: A3 is non-empty");
  if (measure.log_g.empty()) {
    return weighted_expected_increment(measure.pi, kernel, impact, price);
  }
  double sum = 0.0;
  for (int l = 0; l <= kernel.n(); ++l) {
    sum += std::exp(measure.log_g[l] - measure.log_norm) * market_bracket(kernel, l);
  }
  return prefactor(impact, price) * sum;
}

double weighted_expected_increment(std::span<const double> pi, const TransitionKernel& kernel,
                                   const ImpactFunction& impact, double price) {
  double sum = 0.0;
  for (int l = 0; l <= kernel.n(); ++l) {
    sum += pi[l] * market_expected_increment(kernel, impact, price, l);
  }
  return sum;
}

int sign_of(double x, double tol) noexcept { return x > tol ? 1 : (x < -tol ? -1 : 0); }

int majority_opinion(const TransitionKernel& kernel, const ImpactFunction& impact, double price, int i) {
  check_impact(kernel, impact);
  const double scale = prefactor(impact, price);
  // The agent increments are +-scale (1 - 1/N) E_+(i); the tolerance acts on E_+.
  const int e_sign = sign_of(kernel.e_plus(i), kTieTolerance);
  const int buyer = e_sign * sign_of(scale, 0.0);
  const int seller = -buyer;
  return i * buyer + (kernel.n() - i) * seller;
}

int market_sign(const TransitionKernel& kernel, const ImpactFunction& impact, double price, int i) {
  check_impact(kernel, impact);
  const double scale = prefactor(impact, price);
  return sign_of(market_bracket(kernel, i), kTieTolerance * kernel.n()) * sign_of(scale, 0.0);
}

CellConflicts conflict_scan_cell(const TransitionKernel& kernel, const ImpactFunction& impact, double price) {
  CellConflicts cell;
  cell.params = kernel.params();
  for (int i = 0; i <= kernel.n(); ++i) {
    LevelConflict lc;
    lc.level = i;
    lc.market = market_sign(kernel, impact, price, i);
    lc.majority = majority_opinion(kernel, impact, price, i);
    const int m_sign = sign_of(lc.majority, 0.0);
    lc.disagreement = lc.market != 0 && m_sign != 0 && lc.market != m_sign;
    if (lc.disagreement) ++cell.disagreements;
    if (lc.market < 0 && lc.majority > 0) ++cell.supermartingale_violations;
    if (lc.disagreement && lc.market <= 0) ++cell.disagreement_violations;
    cell.levels.push_back(lc);
  }
  return cell;
}

ConflictReport conflict_scan(std::span<const ModelParams> grid, double f_plus, double price) {
  ConflictReport report;
  for (const ModelParams& p : grid) {
    const TransitionKernel kernel(p);
    CellConflicts cell = conflict_scan_cell(kernel, ImpactFunction{f_plus, p.gamma}, price);
    report.disagreements += cell.disagreements;
    report.violations += cell.supermartingale_violations + cell.disagreement_violations;
    report.cells.push_back(std::move(cell));
  }
  return report;
}

CellResult evaluate_cell(const ModelParams& params, double f_plus, double price, int branch_cap) {
  CellResult r;
  r.params = params;
  const TransitionKernel kernel(params);
  const ImpactFunction impact{f_plus, params.gamma};
  const Classification cls = classify(kernel);
  r.a2_levels = cls.levels_in(Attractor::A2);
  r.a3_levels = cls.levels_in(Attractor::A3);
  r.unique = r.a2_levels.empty();
  r.disagreements = conflict_scan_cell(kernel, impact, price).disagreements;
  if (!r.a3_levels.empty()) return r;

  if (static_cast<int>(r.a2_levels.size()) > branch_cap) {
    throw BranchExplosion(std::to_string(r.a2_levels.size()) + " A2 levels exceed the branch cap");
  }
  const unsigned long long count = 1ULL << r.a2_levels.size();
  bool have = false;
  for (unsigned long long b = 0; b < count; ++b) {
    const std::vector<int> signs = branch_signs(r.a2_levels.size(), b);
    InvariantMeasure m;
    bool fallback = false;
    try {
      m = invariant_measure(kernel, cls, signs);
    } catch (const DegenerateChain&) {
      const oracle::StationaryResult solved =
          oracle::stationary_solve(oracle::build_chain(kernel, cls, signs));
      if (!solved.unique()) {
        r.degenerate = true;
        continue;
      }
      m.params = params;
      m.exists = true;
      m.unique = r.unique;
      m.a2_levels = r.a2_levels;
      m.a2_signs = signs;
      m.pi = solved.pi;
      fallback = true;
    }
    ++r.branches;
    const double dw = stationary_expected_increment(m, kernel, impact, price);
    if (!have || dw > r.dw) {
      have = true;
      r.dw = dw;
      r.best_branch = signs;
      r.stats = measure_stats(m.pi);
      r.fallback = fallback;
    }
  }
  r.exists = have;
  if (have) r.degenerate = false;
  return r;
}

QStarResult best_q(std::vector<CellResult> cells) {
  QStarResult out;
  for (const CellResult& cell : cells) {
    if (!cell.exists) {
      out.skipped.push_back(cell.params.q);
    } else if (!out.found || cell.dw > out.dw_star) {
      out.found = true;
      out.q_star = cell.params.q;
      out.dw_star = cell.dw;
      out.unique = cell.unique;
      out.a2_levels = cell.a2_levels;
      out.branch = cell.best_branch;
    }
  }
  if (out.found) {
    const double tol = 1e-12 * std::max(1.0, std::abs(out.dw_star));
    int at_max = 0;
    for (const CellResult& c : cells) {
      if (c.exists && std::abs(c.dw - out.dw_star) <= tol) ++at_max;
    }
    out.tie = at_max > 1;
  }
  out.cells = std::move(cells);
  return out;
}

QStarResult optimal_q(const ModelParams& base, std::span<const double> q_grid, double f_plus, double price,
                      int branch_cap) {
  std::vector<CellResult> cells;
  cells.reserve(q_grid.size());
  for (double q : q_grid) {
    ModelParams p = base;
    p.q = q;
    cells.push_back(evaluate_cell(p, f_plus, price, branch_cap));
  }
  return best_q(std::move(cells));
}

std::vector<double> make_grid(double start, double stop, double step) {
  if (!(step > 0.0)) throw InvalidParameter("grid step must be positive");
  if (stop < start) throw InvalidParameter("empty grid: stop precedes start");
  std::vector<double> grid;
  const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-3));
  for (long long k = 0; k <= count; ++k) {
    // Round to 12 decimals so 0.1 + 2*0.01 prints as 0.12.
    const double v = start + static_cast<double>(k) * step;
    grid.push_back(std::round(v * 1e12) / 1e12);
  }
  return grid;
}

}  // namespace imbal

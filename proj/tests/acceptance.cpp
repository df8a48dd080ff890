// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "imbal/attractors.hpp"
#include "imbal/errors.hpp"
#include "imbal/exact.hpp"
#include "imbal/kernel.hpp"
#include "imbal/measure.hpp"
#include "imbal/oracle.hpp"
#include "imbal/simulator.hpp"
#include "imbal/wealth.hpp"

using namespace imbal;

namespace {

constexpr double kOracleTol = 1e-10;
constexpr double kSymmetryTol = 1e-10;
constexpr double kMeanTol = 0.5;
constexpr double kQStarTol = 0.02;
constexpr double kMagnitudeRelTol = 0.02;
constexpr double kMonteCarloTv = 0.05;
constexpr double kAnnihilationTol = 1e-14;

constexpr double kOracleBudget = 10.0;
constexpr double kKernelBudget = 5.0;
constexpr double kJumpBudget = 1.0;
constexpr double kMonteCarloBudget = 60.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& check, double budget_s = 0.0) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0.0 && secs > budget_s) {
    o.pass = false;
    o.detail += " [over time budget]";
  }
  if (!o.pass) ++failures;
  std::printf("%s %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

ModelParams make(int n, int d, double alpha, double gamma, double q) {
  ModelParams p;
  p.n = n;
  p.d = d;
  p.alpha = alpha;
  p.gamma = gamma;
  p.q = q;
  return p;
}

std::string levels(const std::vector<int>& v) {
  if (v.empty()) return "{}";
  std::string s = "{";
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += ",";
    if (v.size() > 8 && k == 3) {
      s += "...," + std::to_string(v.back());
      break;
    }
    s += std::to_string(v[k]);
  }
  return s + "}";
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

const ModelParams kBase = make(128, 2, 5.0, -0.9, 1.0);

Outcome oracle_equivalence() {
  double worst = 0.0;
  int compared = 0;
  int degenerate = 0;
  int skipped = 0;
  std::string problem;
  for (int n : {4, 8, 16}) {
    for (double q : {0.2, 0.5, 0.8, 1.0}) {
      for (double alpha : {1.0, 2.0, 4.0, 8.0}) {
        for (double gamma : {-1.0, -0.7, -0.3}) {
          const ModelParams p = make(n, 1, alpha, gamma, q);
          const TransitionKernel k(p);
          const Classification c = classify(k);
          if (c.any(Attractor::A2) || c.any(Attractor::A3)) {
            ++skipped;
            continue;
          }
          const auto solved = oracle::stationary_solve(oracle::build_chain(k, c, {}));
          InvariantMeasure m;
          try {
            m = invariant_measure(k, c, {});
          } catch (const DegenerateChain&) {
            ++degenerate;
            // No product form; the dense solve must see the broken chain.
            if (!solved.reducible && problem.empty()) problem = "degenerate but irreducible at " + p.to_string();
            continue;
          }
          if (!solved.unique()) {
            if (problem.empty()) problem = "dense solve not unique at " + p.to_string();
            continue;
          }
          for (int l = 0; l <= n; ++l) worst = std::max(worst, std::abs(m.pi[l] - solved.pi[l]));
          ++compared;
        }
      }
    }
  }
  const bool pass = problem.empty() && compared > 0 && worst <= kOracleTol;
  std::string d = std::to_string(compared) + " cells compared, " + std::to_string(degenerate) +
                  " degenerate (reducible, consistent), " + std::to_string(skipped) + " with A2/A3; " +
                  fmt("max |diff| %.3g (tol %.0e)", worst, kOracleTol);
  if (!problem.empty()) d += "; " + problem;
  return {pass, d};
}

Outcome kernel_exactness() {
  int checked = 0;
  std::string mismatch;
  for (int n = 3; n <= 12; ++n) {
    for (double alpha : {0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 4.1, 5.0, 6.0, 8.0, 12.0}) {
      const ModelParams p = make(n, 1, alpha, -0.5, 1.0);
      for (int i = 0; i <= n; ++i) {
        const auto closed = exact::stay_probabilities(p, i);
        const auto brute = oracle::enumerate_flip_probs(n, 1, alpha, i);
        ++checked;
        if ((closed.plus != brute.plus || closed.minus != brute.minus) && mismatch.empty()) {
          mismatch = "mismatch at " + p.to_string() + " i=" + std::to_string(i);
        }
      }
    }
  }
  return {mismatch.empty(), std::to_string(checked) + " (N, alpha, i) triples exact" +
                                (mismatch.empty() ? "" : "; " + mismatch)};
}

Outcome q1_symmetry() {
  double worst = 0.0;
  int measures = 0;
  for (double alpha : {4.1, 5.0}) {
    for (double gamma : {-1.0, -0.9, -0.7, -0.3, -0.05}) {
      const TransitionKernel k(make(128, 2, alpha, gamma, 1.0));
      const Classification c = classify(k);
      for (const InvariantMeasure& m : all_branches(k, c)) {
        if (!m.exists) return {false, "no measure at " + k.params().to_string()};
        for (int l = 0; l <= 128; ++l) worst = std::max(worst, std::abs(m.pi[l] - m.pi[128 - l]));
        ++measures;
      }
    }
  }
  return {worst <= kSymmetryTol,
          std::to_string(measures) + " measures, " + fmt("max |pi(l) - pi(N-l)| %.3g (tol %.0e)", worst, kSymmetryTol)};
}

Outcome nonunique() {
  const TransitionKernel k(make(128, 2, 5.0, -0.7, 0.7));
  const Classification c = classify(k);
  const auto a2 = c.levels_in(Attractor::A2);
  const auto a3 = c.levels_in(Attractor::A3);
  std::string d = "A2=" + levels(a2) + " A3=" + levels(a3) + " (expected A2={61})";
  if (a2 != std::vector<int>{61}) return {false, d};
  const auto b = all_branches(k, c);
  bool distinct = b.size() == 2 && b[0].exists && b[1].exists && b[0].pi != b[1].pi;
  return {distinct, d + ", " + std::to_string(b.size()) + " branches"};
}

Outcome jump() {
  std::string d;
  bool pass = true;
  for (const auto& [q, want] : {std::pair{0.11, 10.84}, std::pair{0.12, 87.71}}) {
    ModelParams p = kBase;
    p.q = q;
    const CellResult r = evaluate_cell(p, 1.0, 1.0);
    if (!d.empty()) d += "; ";
    if (!r.exists) {
      pass = false;
      d += fmt("q=%.2f: no invariant measure", q) + " (A3=" + levels(r.a3_levels) + fmt(", expected mean %.2f)", want);
      continue;
    }
    const double mean = r.stats.mean;
    if (std::abs(mean - want) > kMeanTol) pass = false;
    d += fmt("q=%.2f: mean %.4f (expected %.2f)", q, mean, want);
  }
  return {pass, d};
}

Outcome q_star() {
  const auto grid = make_grid(0.01, 1.0, 0.01);
  const QStarResult r = optimal_q(kBase, grid, 1.0, 1.0);
  if (!r.found) return {false, "no q on the grid has an invariant measure"};
  // Runner-up: best cell at a different q.
  double second_q = 0.0;
  double second_dw = -INFINITY;
  for (const CellResult& c : r.cells) {
    if (c.exists && c.params.q != r.q_star && c.dw > second_dw) {
      second_dw = c.dw;
      second_q = c.params.q;
    }
  }
  const bool has59 = std::find(r.a2_levels.begin(), r.a2_levels.end(), 59) != r.a2_levels.end();
  const bool position = std::abs(r.q_star - 0.56) <= kQStarTol && !r.unique && has59;
  const bool magnitude = std::abs(r.dw_star - 3.9128) <= kMagnitudeRelTol * 3.9128 &&
                         std::abs(second_dw - 3.9102) <= kMagnitudeRelTol * 3.9102 &&
                         std::abs(second_q - 0.62) <= kQStarTol;
  std::string d = fmt("q*=%.2f dW*=%.6g", r.q_star, r.dw_star) + (r.unique ? " unique" : " non-unique") +
                  " A2=" + levels(r.a2_levels) + fmt("; runner-up q=%.2f dW=%.6g", second_q, second_dw) +
                  "; " + std::to_string(r.skipped.size()) + " q values without a measure" +
                  " (expected q*=0.56 non-unique via level 59, dW*=3.9128, runner-up 3.9102 at 0.62)";
  if (!position) d += "; positional claims fail";
  if (!magnitude) d += "; magnitudes off";
  return {position && magnitude, d};
}

Outcome conflict_implications() {
  std::vector<ModelParams> grid;
  for (double q : make_grid(0.01, 1.0, 0.01)) {
    ModelParams p = kBase;
    p.q = q;
    grid.push_back(p);
  }
  for (double alpha : {3.0, 4.1, 5.0, 7.0}) {
    for (double gamma : {-0.99, -0.9, -0.7, -0.5, -0.3, -0.1}) {
      for (double q : make_grid(0.05, 1.0, 0.05)) grid.push_back(make(128, 2, alpha, gamma, q));
    }
  }
  const ConflictReport r = conflict_scan(grid, 1.0, 1.0);
  int levels_scanned = 0;
  for (const auto& c : r.cells) levels_scanned += static_cast<int>(c.levels.size());
  return {r.violations == 0, std::to_string(grid.size()) + " cells, " + std::to_string(levels_scanned) +
                                 " levels, " + std::to_string(r.disagreements) + " disagreements, " +
                                 std::to_string(r.violations) + " violations"};
}

Outcome nonexistence_band() {
  const auto grid = make_grid(0.01, 1.0, 0.01);
  std::vector<bool> missing;
  for (double q : grid) {
    ModelParams p = kBase;
    p.q = q;
    missing.push_back(classify(TransitionKernel(p)).any(Attractor::A3));
  }
  const auto first = std::find(missing.begin(), missing.end(), true);
  if (first == missing.end()) return {false, "every q has an invariant measure"};
  const auto end = std::find(first, missing.end(), false);
  const bool contiguous = std::find(end, missing.end(), true) == missing.end();
  const bool low = first == missing.begin();
  const double lo = grid[first - missing.begin()];
  const double hi = grid[(end - missing.begin()) - 1];
  return {contiguous && low, fmt("exists=false for q in [%.2f, %.2f]", lo, hi) +
                                 (contiguous ? ", contiguous" : ", NOT contiguous") +
                                 (low ? " from the lowest grid point" : ", not at the low end")};
}

Outcome monte_carlo() {
  SimConfig cfg;
  cfg.params = make(128, 2, 4.1, -0.7, 1.0);
  cfg.epochs = 10000000;
  cfg.seed = 20240611;
  const Simulator sim(cfg);
  const Classification& cls = *sim.classification();
  const MarketState start = sim.initial_state();
  std::vector<int> prev = start.eta2;
  long long mismatches = 0;
  const Trajectory t = sim.run([&](const MarketState& s) {
    for (int i = 0; i <= 128; ++i) {
      switch (cls.cls[i]) {
        case Attractor::A1: mismatches += s.eta2[i] != 1; break;
        case Attractor::A4: mismatches += s.eta2[i] != -1; break;
        case Attractor::A2: mismatches += s.eta2[i] != start.eta2[i]; break;
        case Attractor::A3: mismatches += s.eta2[i] != -prev[i]; break;
      }
    }
    prev = s.eta2;
  });
  std::vector<int> signs;
  for (int l : cls.levels_in(Attractor::A2)) signs.push_back(start.eta2[l]);
  const InvariantMeasure m = invariant_measure(TransitionKernel(cfg.params), cls, signs);
  double tv = 0.0;
  for (int l = 0; l <= 128; ++l) tv += std::abs(static_cast<double>(t.histogram[l]) / cfg.epochs - m.pi[l]);
  tv *= 0.5;
  return {tv <= kMonteCarloTv && mismatches == 0,
          fmt("TV %.4f (tol %.2f) over 1e7 epochs, ", tv, kMonteCarloTv) + std::to_string(mismatches) +
              " eta2 trace mismatches"};
}

Outcome annihilation() {
  double worst = 0.0;
  int measures = 0;
  for (double q : make_grid(0.01, 1.0, 0.01)) {
    const ModelParams p = make(128, 2, 5.0, -1.0, q);
    const TransitionKernel k(p);
    const ImpactFunction f{1.0, -1.0};
    for (int i = 0; i <= 128; ++i) {
      worst = std::max(worst, std::abs(market_expected_increment(k, f, 1.0, i)));
      worst = std::max(worst, std::abs(agent_expected_increment(k, f, 1.0, i, 1)));
      worst = std::max(worst, std::abs(agent_expected_increment(k, f, 1.0, i, -1)));
    }
    const CellResult r = evaluate_cell(p, 1.0, 1.0);
    if (r.exists) {
      worst = std::max(worst, std::abs(r.dw));
      ++measures;
    }
  }
  return {worst <= kAnnihilationTol, "100 q values, " + std::to_string(measures) + " stationary cells, " +
                                         fmt("max |increment| %.3g (tol %.0e)", worst, kAnnihilationTol)};
}

}  // namespace

int main() {
  report("oracle-equivalence", oracle_equivalence, kOracleBudget);
  report("kernel-exactness", kernel_exactness, kKernelBudget);
  report("q1-symmetry", q1_symmetry);
  report("nonunique-branches", nonunique);
  report("mean-jump", jump, kJumpBudget);
  report("optimal-q", q_star);
  report("conflict-implications", conflict_implications);
  report("nonexistence-band", nonexistence_band);
  report("monte-carlo", monte_carlo, kMonteCarloBudget);
  report("gamma-minus-one-annihilation", annihilation);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

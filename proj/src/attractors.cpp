#include "imbal/attractors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <utility>

#include "imbal/errors.hpp"

namespace imbal {

std::string_view to_string(Attractor a) noexcept {
  switch (a) {
    case Attractor::A1: return "A1";
    case Attractor::A2: return "A2";
    case Attractor::A3: return "A3";
    case Attractor::A4: return "A4";
  }
  return "?";
}

double b_threshold(double q, int n, int i) noexcept {
  return (1.0 - 1.0 / q) * (1.0 - static_cast<double>(i) / n);
}

double c_threshold(double q, int n, int i) noexcept {
  return (1.0 - 1.0 / q) * (static_cast<double>(i) / n);
}

std::vector<int> Classification::levels_in(Attractor a) const {
  std::vector<int> out;
  for (int i = 0; i < levels(); ++i) {
    if (cls[i] == a) out.push_back(i);
  }
  return out;
}

bool Classification::any(Attractor a) const {
  for (Attractor c : cls) {
    if (c == a) return true;
  }
  return false;
}

Classification classify(const TransitionKernel& kernel) {
  Classification out;
  out.params = kernel.params();
  const int n = kernel.n();
  const double q = out.params.q;
  out.in_b.resize(n + 1);
  out.in_c.resize(n + 1);
  out.cls.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double e = kernel.e_plus(i);
    const bool b = e - b_threshold(q, n, i) >= -kTieTolerance;
    const bool c = e - c_threshold(q, n, i) <= kTieTolerance;
    out.in_b[i] = b;
    out.in_c[i] = c;
    out.cls[i] = b ? (c ? Attractor::A2 : Attractor::A1) : (c ? Attractor::A4 : Attractor::A3);
  }
  return out;
}

int Eta2Steady::value() const noexcept {
  switch (kind) {
    case Kind::Plus: return 1;
    case Kind::Minus: return -1;
    case Kind::Frozen: return initial;
    case Kind::Oscillating: return 0;
  }
  return 0;
}

std::vector<Eta2Steady> eta2_steady(const Classification& classification,
                                    std::span<const int> initial_eta2) {
  if (static_cast<int>(initial_eta2.size()) != classification.levels()) {
    throw InvalidParameter("initial eta2 must cover every level 0..N");
  }
  std::vector<Eta2Steady> out(classification.levels());
  for (int i = 0; i < classification.levels(); ++i) {
    switch (classification.cls[i]) {
      case Attractor::A1: out[i] = {Eta2Steady::Kind::Plus, 0}; break;
      case Attractor::A4: out[i] = {Eta2Steady::Kind::Minus, 0}; break;
      case Attractor::A2:
        if (initial_eta2[i] != 1 && initial_eta2[i] != -1) {
          throw InvalidParameter("initial eta2 entries must be +1 or -1");
        }
        out[i] = {Eta2Steady::Kind::Frozen, initial_eta2[i]};
        break;
      case Attractor::A3: out[i] = {Eta2Steady::Kind::Oscillating, 0}; break;
    }
  }
  return out;
}

std::vector<int> strategic_spins(const Classification& classification,
                                 std::span<const int> a2_signs) {
  std::vector<int> out(classification.levels(), 0);
  std::size_t next_a2 = 0;
  for (int i = 0; i < classification.levels(); ++i) {
    switch (classification.cls[i]) {
      case Attractor::A1: out[i] = 1; break;
      case Attractor::A4: out[i] = -1; break;
      case Attractor::A3: out[i] = 0; break;
      case Attractor::A2:
        if (next_a2 >= a2_signs.size()) {
          throw InvalidParameter("branch assignment shorter than the A2 set");
        }
        if (a2_signs[next_a2] != 1 && a2_signs[next_a2] != -1) {
          throw InvalidParameter("branch assignment entries must be +1 or -1");
        }
        out[i] = a2_signs[next_a2++];
        break;
    }
  }
  if (next_a2 != a2_signs.size()) {
    throw InvalidParameter("branch assignment longer than the A2 set");
  }
  return out;
}

namespace {

std::vector<std::pair<int, double>> hypergeom_atoms(int n, int successes, int draws) {
  std::vector<std::pair<int, double>> atoms;
  if (successes < 0 || successes > n - 1) {
    // The level carries no agent of this kind; any single atom will do,
    // its weight multiplies a zero fraction.
    atoms.emplace_back(0, 1.0);
    return atoms;
  }
  for (int k = 0; k <= draws; ++k) {
    const double w = hypergeom_pmf(n - 1, successes, draws, k);
    if (w > 0.0) atoms.emplace_back(k, w);
  }
  return atoms;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double lambda_finite_beta(const ModelParams& params, int i, int a, int b) {
  params.validate();
  if (params.frozen()) {
    throw InvalidParameter("lambda_finite_beta needs finite beta; use classify in the frozen phase");
  }
  if (i < 0 || i > params.n) throw InvalidParameter("level outside 0..N");
  if ((a != 1 && a != -1) || (b != 1 && b != -1)) throw InvalidParameter("spins must be +1 or -1");

  const int n = params.n;
  const int d = params.d;
  const double buyers = static_cast<double>(i) / n;
  const double sellers = 1.0 - buyers;
  const double global = params.alpha * std::abs(2.0 * i / n - 1.0);
  const auto u_atoms = hypergeom_atoms(n, i - 1, 2 * d);
  const auto v_atoms = hypergeom_atoms(n, i, 2 * d);
  const double b_thr = b_threshold(params.q, n, i);
  const double c_thr = c_threshold(params.q, n, i);

  double flip = 0.0;
  for (const auto& [u, wu] : u_atoms) {
    const double h_plus = 2.0 * (u - d) - global;
    for (const auto& [v, wv] : v_atoms) {
      const double h_minus = 2.0 * (v - d) + global;
      const double e = sellers * logistic(2.0 * params.beta * h_minus) +
                       params.gamma * buyers * logistic(-2.0 * params.beta * h_plus);
      const bool leaves = a == 1 ? (e - b_thr < -kTieTolerance) : (e - c_thr > kTieTolerance);
      if (leaves) flip += wu * wv;
    }
  }
  flip = std::min(1.0, std::max(0.0, flip));
  return a == b ? 1.0 - flip : flip;
}

}  // namespace imbal

#include "imbal/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cstdlib>
#include <string>

#include "imbal/errors.hpp"

namespace imbal::oracle {

BirthDeathChain build_chain(const TransitionKernel& kernel, const Classification& classification,
                            std::span<const int> a2_signs) {
  if (classification.any(Attractor::A3)) {
    throw NoInvariantMeasure("A3 is non-empty; the expectation spins never settle");
  }
  const std::vector<int> spin = strategic_spins(classification, a2_signs);
  const int n = kernel.n();
  const double q = kernel.params().q;
  BirthDeathChain chain;
  chain.up.resize(n + 1);
  chain.down.resize(n + 1);
  chain.stay.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    double up_bracket = q * (1.0 - kernel.stay_minus(i)) + (1.0 - q) * (spin[i] == 1 ? 1.0 : 0.0);
    double down_bracket = q * (1.0 - kernel.stay_plus(i)) + (1.0 - q) * (spin[i] == -1 ? 1.0 : 0.0);
    if (up_bracket < kZeroRate) up_bracket = 0.0;
    if (down_bracket < kZeroRate) down_bracket = 0.0;
    chain.up[i] = (1.0 - static_cast<double>(i) / n) * up_bracket;
    chain.down[i] = (static_cast<double>(i) / n) * down_bracket;
    chain.stay[i] = 1.0 - chain.up[i] - chain.down[i];
  }
  return chain;
}

StationaryResult stationary_solve(const BirthDeathChain& chain) {
  const int n = chain.n();
  if (n + 1 > kMaxDenseLevels + 1) {
    throw InvalidParameter("dense stationary solve is capped at N = " + std::to_string(kMaxDenseLevels));
  }
  StationaryResult out;

  // Communicating classes are intervals separated by one-way cuts.
  std::vector<std::pair<int, int>> classes;
  int start = 0;
  for (int i = 0; i < n; ++i) {
    if (chain.up[i] <= kZeroRate || chain.down[i + 1] <= kZeroRate) {
      classes.emplace_back(start, i);
      start = i + 1;
    }
  }
  classes.emplace_back(start, n);
  out.reducible = classes.size() > 1;
  for (const auto& [a, b] : classes) {
    const bool closed_below = a == 0 || chain.down[a] <= kZeroRate;
    const bool closed_above = b == n || chain.up[b] <= kZeroRate;
    if (closed_below && closed_above) out.closed_classes.emplace_back(a, b);
  }
  if (out.closed_classes.size() != 1) return out;

  const auto [a, b] = out.closed_classes.front();
  const int m = b - a + 1;
  // Solve (T^T - I) pi = 0 on the class, replacing the first row by sum = 1.
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(m, m);
  for (int r = 0; r < m; ++r) {
    const int i = a + r;
    system(r, r) += chain.stay[i] - 1.0;
    if (r + 1 < m) system(r + 1, r) += chain.up[i];
    if (r > 0) system(r - 1, r) += chain.down[i];
  }
  system.row(0).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs(0) = 1.0;
  const Eigen::VectorXd sol = system.partialPivLu().solve(rhs);

  out.pi.assign(n + 1, 0.0);
  for (int r = 0; r < m; ++r) out.pi[a + r] = std::max(0.0, sol(r));
  return out;
}

exact::StayPair enumerate_flip_probs(int n, int d, double alpha, int i) {
  if (n > 12) throw InvalidParameter("enumeration oracle is limited to N <= 12");
  if (n < 2 || d < 1 || 2 * d > n - 1) throw InvalidParameter("need 1 <= 2d <= N-1");
  if (i < 0 || i > n) throw InvalidParameter("level outside 0..N");
  using exact::Rational;
  const int k = 2 * d;
  const int others = n - 1;
  const Rational global = exact::to_rational(alpha) * Rational(std::abs(2 * i - n)) / Rational(n);

  // Neighbourhood sums for a focal buyer (i-1 other buyers) and a focal
  // seller (i other buyers). The focal site is excluded from Y.
  auto count_stays = [&](int other_buyers, int focal) -> std::pair<long long, long long> {
    if (other_buyers < 0 || other_buyers > others) return {0, 1};
    std::vector<int> spin(others, -1);
    for (int s = 0; s < other_buyers; ++s) spin[s] = 1;
    long long stays = 0;
    long long total = 0;
    for (unsigned mask = 0; mask < (1u << others); ++mask) {
      if (__builtin_popcount(mask) != k) continue;
      int local = 0;
      for (int s = 0; s < others; ++s) {
        if (mask & (1u << s)) local += spin[s];
      }
      const Rational h = Rational(local) - Rational(focal) * global;
      // A zero field leaves the spin unchanged.
      const bool keeps = focal == 1 ? h >= 0 : h <= 0;
      if (keeps) ++stays;
      ++total;
    }
    return {stays, total};
  };

  exact::StayPair out{Rational(0), Rational(0)};
  const auto [plus_stays, plus_total] = count_stays(i - 1, 1);
  const auto [minus_stays, minus_total] = count_stays(i, -1);
  out.plus = Rational(plus_stays, plus_total);
  out.minus = Rational(minus_stays, minus_total);
  return out;
}

}  // namespace imbal::oracle

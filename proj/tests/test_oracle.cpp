#include <cmath>
#include <vector>

#include "doctest.h"
#include "imbal/attractors.hpp"
#include "imbal/errors.hpp"
#include "imbal/exact.hpp"
#include "imbal/kernel.hpp"
#include "imbal/oracle.hpp"

using namespace imbal;

namespace {

ModelParams make(int n, int d, double alpha, double gamma, double q) {
  ModelParams p;
  p.n = n;
  p.d = d;
  p.alpha = alpha;
  p.gamma = gamma;
  p.q = q;
  return p;
}

oracle::BirthDeathChain manual_chain(std::vector<double> up, std::vector<double> down) {
  oracle::BirthDeathChain c;
  c.up = std::move(up);
  c.down = std::move(down);
  for (std::size_t i = 0; i < c.up.size(); ++i) c.stay.push_back(1.0 - c.up[i] - c.down[i]);
  return c;
}

}  // namespace

TEST_CASE("build_chain: q = 1 uses the Hamiltonian probabilities") {
  const TransitionKernel k(make(32, 2, 5.0, -0.7, 1.0));
  const Classification c = classify(k);
  const std::vector<int> signs(c.levels_in(Attractor::A2).size(), 1);
  const auto chain = oracle::build_chain(k, c, signs);
  for (int i = 0; i <= 32; ++i) {
    const LevelProbs p = k.probs(i);
    CHECK(chain.up[i] == doctest::Approx(p.mp).epsilon(1e-14));
    CHECK(chain.down[i] == doctest::Approx(p.pm).epsilon(1e-14));
    CHECK(std::abs(chain.up[i] + chain.down[i] + chain.stay[i] - 1.0) <= 1e-15);
  }
  CHECK(chain.up[32] == 0.0);
  CHECK(chain.down[0] == 0.0);
}

TEST_CASE("build_chain: strategic limit on A1 levels") {
  const TransitionKernel k(make(32, 2, 5.0, -0.7, 1e-9));
  Classification c = classify(k);
  for (auto& a : c.cls) a = Attractor::A1;
  const auto chain = oracle::build_chain(k, c, {});
  for (int i = 0; i <= 32; ++i) {
    CHECK(std::abs(chain.up[i] - (1.0 - i / 32.0)) <= 1e-8);
    CHECK(chain.down[i] <= 1e-8);
  }
}

TEST_CASE("build_chain: rejects A3") {
  const TransitionKernel k(make(128, 2, 5.0, -0.9, 0.3));
  const Classification c = classify(k);
  REQUIRE(c.any(Attractor::A3));
  CHECK_THROWS_AS(oracle::build_chain(k, c, {}), NoInvariantMeasure);
}

TEST_CASE("stationary_solve: symmetric walk gives binomial weights") {
  const int n = 10;
  std::vector<double> up(n + 1);
  std::vector<double> down(n + 1);
  for (int i = 0; i <= n; ++i) {
    up[i] = 0.5 * (1.0 - static_cast<double>(i) / n);
    down[i] = 0.5 * static_cast<double>(i) / n;
  }
  const auto r = oracle::stationary_solve(manual_chain(up, down));
  REQUIRE(r.unique());
  CHECK_FALSE(r.reducible);
  double binom = 1.0;
  for (int i = 0; i <= n; ++i) {
    CHECK(r.pi[i] == doctest::Approx(binom / 1024.0).epsilon(1e-12));
    binom = binom * (n - i) / (i + 1);
  }
}

TEST_CASE("stationary_solve: cuts") {
  std::vector<double> up{0.5, 0.5, 0.5, 0.5, 0.0};
  std::vector<double> down{0.0, 0.3, 0.3, 0.3, 0.3};
  SUBCASE("cut in both directions: two closed classes") {
    auto u = up;
    auto d = down;
    u[1] = 0.0;
    d[2] = 0.0;
    const auto r = oracle::stationary_solve(manual_chain(u, d));
    CHECK(r.reducible);
    REQUIRE(r.closed_classes.size() == 2);
    CHECK(r.closed_classes[0] == std::pair{0, 1});
    CHECK(r.closed_classes[1] == std::pair{2, 4});
    CHECK(r.pi.empty());
  }
  SUBCASE("one-way cut: the upper block is transient") {
    auto u = up;
    u[1] = 0.0;
    const auto r = oracle::stationary_solve(manual_chain(u, down));
    CHECK(r.reducible);
    REQUIRE(r.unique());
    CHECK(r.closed_classes[0] == std::pair{0, 1});
    CHECK(r.pi[0] == doctest::Approx(0.3 / 0.8));
    CHECK(r.pi[1] == doctest::Approx(0.5 / 0.8));
    CHECK(r.pi[2] == 0.0);
    CHECK(r.pi[4] == 0.0);
  }
}

TEST_CASE("enumerate_flip_probs: exact agreement with the closed form") {
  for (double alpha : {1.0, 2.0, 4.0}) {
    for (int i = 0; i <= 8; ++i) {
      const auto brute = oracle::enumerate_flip_probs(8, 1, alpha, i);
      const auto closed = exact::stay_probabilities(make(8, 1, alpha, -0.5, 1.0), i);
      CHECK(brute.plus == closed.plus);
      CHECK(brute.minus == closed.minus);
    }
  }
}

TEST_CASE("enumerate_flip_probs: edge cases") {
  CHECK(oracle::enumerate_flip_probs(8, 1, 2.0, 0).plus == 0);
  CHECK(oracle::enumerate_flip_probs(8, 1, 2.0, 8).minus == 0);
  // Huge alpha: every level with i != N/2 is out of the band.
  for (int i = 0; i <= 9; ++i) {
    const auto s = oracle::enumerate_flip_probs(9, 2, 1000.0, i);
    CHECK(s.plus == 0);
    CHECK(s.minus == 0);
  }
  CHECK_THROWS_AS(oracle::enumerate_flip_probs(13, 1, 2.0, 3), InvalidParameter);
}

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "imbal/attractors.hpp"
#include "imbal/errors.hpp"
#include "imbal/measure.hpp"
#include "imbal/oracle.hpp"
#include "imbal/simulator.hpp"

using namespace imbal;

namespace {

SimConfig config(int n, int d, double alpha, double gamma, double q, long long epochs, std::uint64_t seed) {
  SimConfig c;
  c.params.n = n;
  c.params.d = d;
  c.params.alpha = alpha;
  c.params.gamma = gamma;
  c.params.q = q;
  c.epochs = epochs;
  c.seed = seed;
  return c;
}

double total_variation(const std::vector<std::uint64_t>& hist, const std::vector<double>& pi) {
  const double total = static_cast<double>(std::accumulate(hist.begin(), hist.end(), std::uint64_t{0}));
  double tv = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) tv += std::abs(hist[i] / total - pi[i]);
  return 0.5 * tv;
}

}  // namespace

TEST_CASE("config validation") {
  SimConfig c = config(16, 1, 4.0, -0.5, 1.0, 0, 1);
  CHECK_THROWS_AS(Simulator{c}, InvalidParameter);
  c.epochs = 10;
  c.eta2_init = InitMode::Given;
  c.eta2.assign(16, 1);  // one short
  CHECK_THROWS_AS(Simulator{c}, InvalidParameter);
  c.eta2.assign(17, 1);
  CHECK_NOTHROW(Simulator{c});
}

TEST_CASE("same seed, same trajectory") {
  SimConfig c = config(32, 2, 5.0, -0.7, 0.9, 20000, 42);
  c.record.paths = true;
  c.record.path_stride = 100;
  const Trajectory a = Simulator(c).run();
  const Trajectory b = Simulator(c).run();
  CHECK(a.histogram == b.histogram);
  CHECK(a.final_state.eta1 == b.final_state.eta1);
  CHECK(a.final_state.price == b.final_state.price);
  CHECK(a.final_state.market_wealth == b.final_state.market_wealth);
  REQUIRE(a.path.size() == 200);
  CHECK(a.path.back().epoch == 20000);
  c.seed = 43;
  CHECK(Simulator(c).run().histogram != a.histogram);
}

TEST_CASE("a step without an imbalance move leaves price and wealth alone") {
  SimConfig c = config(16, 1, 4.0, -0.5, 1e-12, 1, 7);
  c.eta1_init = InitMode::AllPlus;
  c.eta2_init = InitMode::AllPlus;
  c.initial_capital = 2.5;
  const Simulator sim(c);
  MarketState s = sim.initial_state();
  sim.step(s);
  CHECK(s.last_move == 0);
  CHECK(s.price == 1.0);
  CHECK(s.market_wealth == 2.5 * 16);
  for (double w : s.wealth) CHECK(w == 2.5);
}

TEST_CASE("wealth follows the recursions") {
  SimConfig c = config(16, 1, 4.0, -0.6, 0.7, 1, 3);
  c.f_plus = 0.01;
  const Simulator sim(c);
  MarketState s = sim.initial_state();
  for (int e = 0; e < 500; ++e) {
    const MarketState before = s;
    sim.step(s);
    CHECK(std::abs(s.n_plus - before.n_plus) <= 1);
    const int x = s.n_plus - before.n_plus;
    CHECK(x == s.last_move);
    const double dp = before.price * (x > 0 ? 0.01 : (x < 0 ? -0.6 * 0.01 : 0.0));
    CHECK(s.price == doctest::Approx(before.price + dp).epsilon(1e-15));
    CHECK(s.market_wealth ==
          doctest::Approx(before.market_wealth + dp * (2.0 * before.n_plus - 16 + x)).epsilon(1e-13));
    int changed = 0;
    for (int y = 0; y < 16; ++y) {
      if (s.eta1[y] != before.eta1[y]) ++changed;
    }
    CHECK(changed <= 1);
  }
}

TEST_CASE("frozen-phase expectation spins follow the attractor classes") {
  // This cell has A3 levels.
  SimConfig c = config(128, 2, 5.0, -0.9, 0.3, 2000, 11);
  const Simulator sim(c);
  const Classification& cls = *sim.classification();
  REQUIRE(cls.any(Attractor::A3));
  const MarketState start = sim.initial_state();
  std::vector<int> prev = start.eta2;
  int mismatches = 0;
  sim.run([&](const MarketState& s) {
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
  CHECK(mismatches == 0);
}

TEST_CASE("finite beta runs and conserves N+") {
  SimConfig c = config(32, 2, 5.0, -0.7, 0.6, 250000, 5);
  c.params.beta = 1.5;
  const Simulator sim(c);
  CHECK(sim.classification() == nullptr);
  const Trajectory t = sim.run();
  CHECK(std::accumulate(t.histogram.begin(), t.histogram.end(), std::uint64_t{0}) == 250000);
  CHECK(std::count(t.final_state.eta1.begin(), t.final_state.eta1.end(), 1) == t.final_state.n_plus);
}

TEST_CASE("N = 8 histogram converges to the stationary vector") {
  const SimConfig c = config(8, 1, 4.0, -0.5, 1.0, 10000000, 2024);
  const Simulator sim(c);
  const TransitionKernel k(c.params);
  const Classification cls = classify(k);
  const std::vector<int> signs(cls.levels_in(Attractor::A2).size(), 1);
  const auto solved = oracle::stationary_solve(oracle::build_chain(k, cls, signs));
  REQUIRE(solved.unique());
  const Trajectory t = sim.run();
  CHECK(total_variation(t.histogram, solved.pi) <= 0.02);
}

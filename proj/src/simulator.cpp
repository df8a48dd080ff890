#include "imbal/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <utility>

#include "imbal/errors.hpp"

namespace imbal {
namespace {

constexpr long long kRecountInterval = 100000;

bool all_spins(const std::vector<int>& v) {
  return std::all_of(v.begin(), v.end(), [](int s) { return s == 1 || s == -1; });
}

}  // namespace

void SimConfig::validate() const {
  params.validate();
  if (epochs < 1) throw InvalidParameter("epochs must be at least 1");
  if (!(initial_price > 0.0)) throw InvalidParameter("initial price must be positive");
  if (!(f_plus > 0.0)) throw InvalidParameter("f(1,N) must be positive");
  if (record.path_stride < 1) throw InvalidParameter("path stride must be at least 1");
  if (eta1_init == InitMode::Given &&
      (static_cast<int>(eta1.size()) != params.n || !all_spins(eta1))) {
    throw InvalidParameter("given eta1 must hold N entries of +1/-1");
  }
  if (eta2_init == InitMode::Given &&
      (static_cast<int>(eta2.size()) != params.n + 1 || !all_spins(eta2))) {
    throw InvalidParameter("given eta2 must hold N+1 entries of +1/-1");
  }
}

Simulator::Simulator(SimConfig config) : config_(std::move(config)) {
  config_.validate();
  impact_ = ImpactFunction{config_.f_plus, config_.params.gamma};
  const TransitionKernel kernel(config_.params);
  classification_ = classify(kernel);
  if (!config_.params.frozen()) {
    const int levels = config_.params.n + 1;
    flip_from_plus_.resize(levels);
    flip_from_minus_.resize(levels);
    for (int i = 0; i < levels; ++i) {
      flip_from_plus_[i] = lambda_finite_beta(config_.params, i, 1, -1);
      flip_from_minus_[i] = lambda_finite_beta(config_.params, i, -1, 1);
    }
  }
}

MarketState Simulator::initial_state() const {
  const int n = config_.params.n;
  MarketState s;
  s.rng.seed(config_.seed);
  std::bernoulli_distribution coin(0.5);

  switch (config_.eta1_init) {
    case InitMode::Given: s.eta1 = config_.eta1; break;
    case InitMode::AllPlus: s.eta1.assign(n, 1); break;
    case InitMode::RandomUniform:
      s.eta1.resize(n);
      for (int& v : s.eta1) v = coin(s.rng) ? 1 : -1;
      break;
  }
  switch (config_.eta2_init) {
    case InitMode::Given: s.eta2 = config_.eta2; break;
    case InitMode::AllPlus: s.eta2.assign(n + 1, 1); break;
    case InitMode::RandomUniform:
      s.eta2.resize(n + 1);
      for (int& v : s.eta2) v = coin(s.rng) ? 1 : -1;
      break;
  }
  s.n_plus = static_cast<int>(std::count(s.eta1.begin(), s.eta1.end(), 1));
  s.price = config_.initial_price;
  s.wealth.assign(n, config_.initial_capital);
  s.market_wealth = config_.initial_capital * n;
  return s;
}

void Simulator::step(MarketState& s) const {
  const ModelParams& p = config_.params;
  const int n = p.n;
  const int k = p.neighbours();
  std::uniform_int_distribution<int> pick_site(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int site = pick_site(s.rng);
  const int level = s.n_plus;
  const int old_spin = s.eta1[site];
  int new_spin = old_spin;

  if (unit(s.rng) < p.q) {
    // Uniform 2d-subset of the other N-1 sites (Floyd's algorithm).
    int chosen[64];
    int count = 0;
    int local = 0;
    const int others = n - 1;
    auto seen = [&](int v) { return std::find(chosen, chosen + count, v) != chosen + count; };
    if (k <= 64) {
      for (int j = others - k; j < others; ++j) {
        int t = std::uniform_int_distribution<int>(0, j)(s.rng);
        if (seen(t)) t = j;
        chosen[count++] = t;
      }
      for (int c = 0; c < count; ++c) local += s.eta1[chosen[c] >= site ? chosen[c] + 1 : chosen[c]];
    } else {
      std::vector<int> idx(others);
      for (int j = 0; j < others; ++j) idx[j] = j;
      for (int j = 0; j < k; ++j) {
        const int t = std::uniform_int_distribution<int>(j, others - 1)(s.rng);
        std::swap(idx[j], idx[t]);
        local += s.eta1[idx[j] >= site ? idx[j] + 1 : idx[j]];
      }
    }
    const double field = local - p.alpha * old_spin * std::abs(2.0 * level - n) / n;
    if (p.frozen()) {
      if (field > 0.0) {
        new_spin = 1;
      } else if (field < 0.0) {
        new_spin = -1;
      }
    } else {
      const double to_plus = 1.0 / (1.0 + std::exp(-2.0 * p.beta * field));
      new_spin = unit(s.rng) < to_plus ? 1 : -1;
    }
  } else {
    new_spin = s.eta2[level];
  }

  const int move = (new_spin - old_spin) / 2;
  s.eta1[site] = new_spin;
  s.n_plus += move;
  s.last_move = move;

  const double dp = s.price * impact_(move);
  if (dp != 0.0) {
    s.market_wealth += dp * (2.0 * level - n + move);
    for (int y = 0; y < n; ++y) {
      if (y != site) s.wealth[y] += s.eta1[y] * dp;
    }
    s.price += dp;
  }

  if (p.frozen()) {
    for (int i = 0; i <= n; ++i) {
      switch (classification_.cls[i]) {
        case Attractor::A1: s.eta2[i] = 1; break;
        case Attractor::A4: s.eta2[i] = -1; break;
        case Attractor::A2: break;
        case Attractor::A3: s.eta2[i] = -s.eta2[i]; break;
      }
    }
  } else {
    for (int i = 0; i <= n; ++i) {
      const double flip = s.eta2[i] == 1 ? flip_from_plus_[i] : flip_from_minus_[i];
      if (unit(s.rng) < flip) s.eta2[i] = -s.eta2[i];
    }
  }
  ++s.epoch;
}

Trajectory Simulator::run(const std::function<void(const MarketState&)>& observer) const {
  Trajectory t;
  MarketState s = initial_state();
  t.histogram.assign(config_.params.n + 1, 0);
  double level_sum = 0.0;
  for (long long e = 0; e < config_.epochs; ++e) {
    step(s);
    if (config_.record.histogram) ++t.histogram[s.n_plus];
    level_sum += s.n_plus;
    if (config_.record.paths && s.epoch % config_.record.path_stride == 0) {
      t.path.push_back(PathRow{s.epoch, s.n_plus, s.price, s.market_wealth});
    }
    if (s.epoch % kRecountInterval == 0) {
      const int recount = static_cast<int>(std::count(s.eta1.begin(), s.eta1.end(), 1));
      if (recount != s.n_plus) throw std::logic_error("cached N+ drifted from the lattice");
    }
    if (observer) observer(s);
  }
  t.mean_n_plus = level_sum / static_cast<double>(config_.epochs);
  t.final_state = std::move(s);
  return t;
}

}  // namespace imbal

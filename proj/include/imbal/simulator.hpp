#ifndef IMBAL_SIMULATOR_HPP
#define IMBAL_SIMULATOR_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <string_view>
#include <vector>

#include "imbal/attractors.hpp"
#include "imbal/kernel.hpp"
#include "imbal/wealth.hpp"

namespace imbal {

inline constexpr std::string_view kRngAlgorithm = "mt19937_64";

enum class InitMode { RandomUniform, AllPlus, Given };

struct RecordFlags {
  bool histogram = true;
  bool paths = false;  // (epoch, n_plus, price, aggregate wealth) rows
  long long path_stride = 1;
};

struct SimConfig {
  ModelParams params;
  double f_plus = 1e-3;
  InitMode eta1_init = InitMode::RandomUniform;
  std::vector<int> eta1;  // used with InitMode::Given, one entry per site
  InitMode eta2_init = InitMode::RandomUniform;
  std::vector<int> eta2;  // used with InitMode::Given, one entry per level 0..N
  double initial_price = 1.0;
  double initial_capital = 0.0;
  long long epochs = 1;
  std::uint64_t seed = 0;
  RecordFlags record;

  void validate() const;
};

struct MarketState {
  std::vector<int> eta1;  // per site
  std::vector<int> eta2;  // per imbalance level 0..N
  int n_plus = 0;
  double price = 1.0;
  std::vector<double> wealth;  // per agent
  double market_wealth = 0.0;  // aggregate recursion
  long long epoch = 0;
  int last_move = 0;  // X̄ of the latest epoch
  std::mt19937_64 rng;
};

struct PathRow {
  long long epoch = 0;
  int n_plus = 0;
  double price = 0.0;
  double market_wealth = 0.0;
};

struct Trajectory {
  std::vector<std::uint64_t> histogram;  // epochs spent at each level
  std::vector<PathRow> path;
  MarketState final_state;
  double mean_n_plus = 0.0;
};

class Simulator {
 public:
  explicit Simulator(SimConfig config);

  const SimConfig& config() const noexcept { return config_; }
  // Frozen phase only: empty otherwise.
  const Classification* classification() const noexcept {
    return config_.params.frozen() ? &classification_ : nullptr;
  }

  MarketState initial_state() const;

  // One epoch: a uniformly chosen agent moves (heat-bath with probability
  // q, strategic otherwise), price and wealth update, then every level's
  // expectation spin updates synchronously.
  void step(MarketState& state) const;

  // Runs config().epochs epochs from initial_state(). The observer, when
  // given, sees the state after every epoch.
  Trajectory run(const std::function<void(const MarketState&)>& observer = {}) const;

 private:
  SimConfig config_;
  ImpactFunction impact_;
  Classification classification_;
  // Finite beta: probability that a level holding +1 (resp. -1) flips.
  std::vector<double> flip_from_plus_;
  std::vector<double> flip_from_minus_;
};

}  // namespace imbal

#endif  // IMBAL_SIMULATOR_HPP

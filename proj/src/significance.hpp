#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "backtest.hpp"

namespace buzz {

enum class Staking { unit, permuted };
enum class Metric { roi, absolute_return };

const char* staking_name(Staking s);
const char* metric_name(Metric m);

struct SignificanceConfig {
  long trials = 100000;
  std::uint64_t seed = 42;
  Staking staking = Staking::unit;
  Metric metric = Metric::roi;
  int threads = 0;  // 0 = hardware concurrency
};

struct UniverseRow {
  double odds = 0;
  int y = 0;
};

struct SignificanceResult {
  double p_bs = 0;
  long trials = 0;
  long trials_at_or_above = 0;
  long n_bets = 0;
  long universe_size = 0;
  std::uint64_t seed = 0;
  Staking staking = Staking::unit;
  Metric metric = Metric::roi;
  double real_value = 0;  // ROI as a fraction, or absolute return

  std::string to_json(const std::string& label = "") const;
};

// p_bs = share of trials whose random strategy does at least as well as the
// real one. Each trial draws n_bets rows uniformly without replacement from
// the universe and settles them at the universe odds; stakes are 1 per bet,
// or under permuted staking a reshuffle of the real strategy's stakes.
//
// Per-trial generators are seeded with the trial's index position in a
// SplitMix64 stream over the master seed, so any thread count or trial order
// produces the identical count.
SignificanceResult random_strategy_pvalue(double real_value, const std::vector<UniverseRow>& universe,
                                          long n_bets, const std::vector<double>& real_stakes,
                                          const SignificanceConfig& cfg);

// Universe, bet count, stakes, and the real metric value all taken from a
// completed ledger.
SignificanceResult random_strategy_pvalue(const BetLedger& ledger, const SignificanceConfig& cfg);

}  // namespace buzz

#include "significance.hpp"

#include <algorithm>
#include <bit>
#include <json.hpp>
#include <random>
#include <thread>

#include "errors.hpp"

namespace buzz {

const char* staking_name(Staking s) { return s == Staking::unit ? "unit" : "permuted"; }
const char* metric_name(Metric m) { return m == Metric::roi ? "roi" : "absolute_return"; }

namespace {

// i-th output of the SplitMix64 stream seeded with `seed`.
std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t z = seed + (i + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Uniform integer in [0, n) by masked rejection; avoids distribution classes
// whose streams differ between standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  std::uint64_t mask = ~0ull >> std::countl_zero(n | 1);
  for (;;) {
    std::uint64_t v = rng() & mask;
    if (v < n) return v;
  }
}

struct TrialScratch {
  std::vector<std::uint32_t> stamp;  // membership mark per universe row
  std::vector<std::uint32_t> picked;
  std::vector<double> stakes;
  std::uint32_t epoch = 0;
};

// Floyd's sampling of n distinct indices from [0, universe); insertion order
// is part of the deterministic stream.
void sample_rows(std::mt19937_64& rng, std::uint64_t universe, std::uint64_t n, TrialScratch& s) {
  s.picked.clear();
  ++s.epoch;
  for (std::uint64_t j = universe - n; j < universe; ++j) {
    std::uint64_t t = bounded(rng, j + 1);
    std::uint64_t pick = s.stamp[t] == s.epoch ? j : t;
    s.stamp[pick] = s.epoch;
    s.picked.push_back(static_cast<std::uint32_t>(pick));
  }
}

double trial_metric(std::mt19937_64& rng, const std::vector<UniverseRow>& universe,
                    const std::vector<double>& real_stakes, Staking staking, Metric metric,
                    TrialScratch& s) {
  const std::uint64_t n = s.picked.size();
  const double* stakes = nullptr;
  if (staking == Staking::permuted) {
    s.stakes.assign(real_stakes.begin(), real_stakes.end());
    for (std::uint64_t i = n - 1; i > 0; --i) {
      std::uint64_t j = bounded(rng, i + 1);
      std::swap(s.stakes[i], s.stakes[j]);
    }
    stakes = s.stakes.data();
  }
  double profit = 0;
  double invested = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const UniverseRow& r = universe[s.picked[i]];
    double stake = stakes ? stakes[i] : 1.0;
    profit += r.y ? stake * (r.odds - 1.0) : -stake;
    invested += stake;
  }
  if (metric == Metric::absolute_return) return profit;
  if (invested <= 0) raise(Errc::zero_investment, "random trial invested nothing");
  return profit / invested;
}

}  // namespace

SignificanceResult random_strategy_pvalue(double real_value, const std::vector<UniverseRow>& universe,
                                          long n_bets, const std::vector<double>& real_stakes,
                                          const SignificanceConfig& cfg) {
  if (cfg.trials <= 0) raise(Errc::invalid_argument, "trials must be positive");
  if (n_bets <= 0) raise(Errc::invalid_argument, "n_bets must be positive");
  if (static_cast<std::size_t>(n_bets) > universe.size())
    raise(Errc::universe_too_small, "cannot draw " + std::to_string(n_bets) + " rows from a universe of " +
                                        std::to_string(universe.size()));
  if (cfg.staking == Staking::permuted && real_stakes.size() != static_cast<std::size_t>(n_bets))
    raise(Errc::invalid_argument, "permuted staking needs one real stake per bet");

  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (static_cast<long>(threads) > cfg.trials) threads = static_cast<int>(cfg.trials);

  auto run_block = [&](long lo, long hi) -> long {
    TrialScratch scratch;
    scratch.stamp.assign(universe.size(), 0);
    long hits = 0;
    for (long t = lo; t < hi; ++t) {
      std::mt19937_64 rng(splitmix64_at(cfg.seed, static_cast<std::uint64_t>(t)));
      sample_rows(rng, universe.size(), static_cast<std::uint64_t>(n_bets), scratch);
      double v = trial_metric(rng, universe, real_stakes, cfg.staking, cfg.metric, scratch);
      if (v >= real_value) ++hits;
    }
    return hits;
  };

  long at_or_above = 0;
  if (threads == 1) {
    at_or_above = run_block(0, cfg.trials);
  } else {
    std::vector<long> counts(threads, 0);
    std::vector<std::thread> pool;
    long per = cfg.trials / threads;
    long extra = cfg.trials % threads;
    long start = 0;
    for (int i = 0; i < threads; ++i) {
      long len = per + (i < extra ? 1 : 0);
      pool.emplace_back([&, i, start, len] { counts[i] = run_block(start, start + len); });
      start += len;
    }
    for (auto& th : pool) th.join();
    for (long c : counts) at_or_above += c;
  }

  SignificanceResult res;
  res.trials = cfg.trials;
  res.trials_at_or_above = at_or_above;
  res.p_bs = static_cast<double>(at_or_above) / static_cast<double>(cfg.trials);
  res.n_bets = n_bets;
  res.universe_size = static_cast<long>(universe.size());
  res.seed = cfg.seed;
  res.staking = cfg.staking;
  res.metric = cfg.metric;
  res.real_value = real_value;
  return res;
}

SignificanceResult random_strategy_pvalue(const BetLedger& ledger, const SignificanceConfig& cfg) {
  std::vector<UniverseRow> universe;
  universe.reserve(ledger.entries.size());
  std::vector<double> stakes;
  double profit = 0;
  double invested = 0;
  for (const BetRecord& e : ledger.entries) {
    universe.push_back({e.odds, e.y});
    if (e.f_star > 0) {
      stakes.push_back(e.f_star);
      profit += e.profit;
      invested += e.f_star;
    }
  }
  double real = 0;
  if (cfg.metric == Metric::absolute_return) {
    real = profit;
  } else {
    if (invested <= 0) raise(Errc::zero_investment, "strategy placed no stake; ROI comparison undefined");
    real = profit / invested;
  }
  return random_strategy_pvalue(real, universe, ledger.n_bets, stakes, cfg);
}

std::string SignificanceResult::to_json(const std::string& label) const {
  nlohmann::ordered_json j;
  j["kind"] = "significance";
  if (!label.empty()) j["label"] = label;
  j["p_bs"] = p_bs;
  j["trials"] = trials;
  j["trials_at_or_above"] = trials_at_or_above;
  j["n_bets"] = n_bets;
  j["universe_size"] = universe_size;
  j["seed"] = seed;
  j["staking"] = staking_name(staking);
  j["metric"] = metric_name(metric);
  j["real_value"] = real_value;
  return j.dump(2);
}

}  // namespace buzz

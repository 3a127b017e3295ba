#include <cmath>
#include <doctest.h>
#include <vector>

#include "errors.hpp"
#include "significance.hpp"

using namespace buzz;

namespace {

SignificanceConfig quick_cfg(long trials, std::uint64_t seed = 42) {
  SignificanceConfig cfg;
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.threads = 1;
  return cfg;
}

// Universe where every two-row subset has a distinct, hand-enumerable
// absolute return under unit stakes:
//   {0,2} +1.5   {0,1} 0   {0,3} 0   {1,2} -0.5   {2,3} -0.5   {1,3} -2
std::vector<UniverseRow> small_universe() {
  return {{2.0, 1}, {3.0, 0}, {1.5, 1}, {5.0, 0}};
}

BetRecord make_entry(const std::string& id, double odds, int y, double f_star) {
  BetRecord e;
  e.match_id = id;
  e.side = Side::winner;
  e.date = Date::from_ymd(2019, 6, 1);
  e.player = "P " + id;
  e.opponent = "O " + id;
  e.odds = odds;
  e.y = y;
  e.f_star = f_star;
  e.profit = y ? f_star * (odds - 1.0) : -f_star;
  return e;
}

}  // namespace

TEST_CASE("trial counts are independent of the thread split") {
  // 61 distinguishable rows so different samples score differently.
  std::vector<UniverseRow> universe;
  for (int i = 0; i < 61; ++i) universe.push_back({1.5 + 0.1 * double(i % 13), i % 3 == 0});

  SignificanceConfig cfg = quick_cfg(5003, 20240817);
  for (Staking staking : {Staking::unit, Staking::permuted}) {
    for (Metric metric : {Metric::roi, Metric::absolute_return}) {
      cfg.staking = staking;
      cfg.metric = metric;
      std::vector<double> stakes(12, 1.0);
      for (size_t i = 0; i < stakes.size(); ++i) stakes[i] = 0.1 + 0.05 * double(i);

      cfg.threads = 1;
      SignificanceResult one = random_strategy_pvalue(0.02, universe, 12, stakes, cfg);
      cfg.threads = 4;
      SignificanceResult four = random_strategy_pvalue(0.02, universe, 12, stakes, cfg);
      cfg.threads = 7;  // trials not divisible by the pool size
      SignificanceResult seven = random_strategy_pvalue(0.02, universe, 12, stakes, cfg);

      CHECK(one.trials_at_or_above == four.trials_at_or_above);
      CHECK(one.trials_at_or_above == seven.trials_at_or_above);
      CHECK(one.p_bs == four.p_bs);
      // The count must also be reproducible run to run.
      cfg.threads = 1;
      SignificanceResult again = random_strategy_pvalue(0.02, universe, 12, stakes, cfg);
      CHECK(again.trials_at_or_above == one.trials_at_or_above);
    }
  }
}

TEST_CASE("sampled shares converge to the enumerated subset probabilities") {
  std::vector<UniverseRow> universe = small_universe();
  SignificanceConfig cfg = quick_cfg(60000, 7);
  cfg.metric = Metric::absolute_return;

  // One of six subsets reaches +1.5.
  SignificanceResult top = random_strategy_pvalue(1.5, universe, 2, {}, cfg);
  CHECK(top.p_bs == doctest::Approx(1.0 / 6.0).epsilon(0.05));

  // Three of six subsets break even or better.
  SignificanceResult even = random_strategy_pvalue(0.0, universe, 2, {}, cfg);
  CHECK(even.p_bs == doctest::Approx(0.5).epsilon(0.03));

  // Every subset beats the floor; ties count as at-or-above, so this is
  // exact, not approximate.
  SignificanceResult floor = random_strategy_pvalue(-2.0, universe, 2, {}, cfg);
  CHECK(floor.p_bs == 1.0);
  CHECK(floor.trials_at_or_above == floor.trials);

  // Nothing beats an unreachable bar.
  SignificanceResult bar = random_strategy_pvalue(1.6, universe, 2, {}, cfg);
  CHECK(bar.p_bs == 0.0);
}

TEST_CASE("drawing the whole universe leaves no randomness") {
  std::vector<UniverseRow> universe = {{2.0, 1}, {4.0, 0}, {1.5, 1}};
  // Every trial must select all three rows: profit 1 - 1 + 0.5 = 0.5.
  SignificanceConfig cfg = quick_cfg(500);
  cfg.metric = Metric::absolute_return;
  SignificanceResult hit = random_strategy_pvalue(0.5, universe, 3, {}, cfg);
  CHECK(hit.p_bs == 1.0);
  SignificanceResult miss = random_strategy_pvalue(0.5 + 1e-12, universe, 3, {}, cfg);
  CHECK(miss.p_bs == 0.0);
}

TEST_CASE("a degenerate universe ties every trial") {
  std::vector<UniverseRow> universe(20, UniverseRow{2.0, 1});
  SignificanceConfig cfg = quick_cfg(1000);
  cfg.metric = Metric::roi;
  // Unit stakes on always-winning even odds: ROI is exactly 1 every time.
  SignificanceResult r = random_strategy_pvalue(1.0, universe, 5, {}, cfg);
  CHECK(r.p_bs == 1.0);

  cfg.staking = Staking::permuted;
  std::vector<double> stakes(5, 0.3);
  SignificanceResult p = random_strategy_pvalue(1.0, universe, 5, stakes, cfg);
  CHECK(p.p_bs == 1.0);  // equal stakes permute to themselves
}

TEST_CASE("permuted staking reuses the real stakes") {
  // A single bet with stake 2: every trial returns +/- 2 (odds - 1), so the
  // absolute-return bar of +2.0 at odds 3.0 is hit exactly when the drawn
  // row wins.
  std::vector<UniverseRow> universe = {{3.0, 1}, {3.0, 0}, {3.0, 0}, {3.0, 0}};
  SignificanceConfig cfg = quick_cfg(40000, 11);
  cfg.metric = Metric::absolute_return;
  cfg.staking = Staking::permuted;
  SignificanceResult r = random_strategy_pvalue(4.0, universe, 1, {2.0}, cfg);
  // One row in four wins, and only a win doubles the stake.
  CHECK(r.p_bs == doctest::Approx(0.25).epsilon(0.05));

  // Under unit staking the same bar is unreachable: a win pays only +2.
  cfg.staking = Staking::unit;
  SignificanceResult u = random_strategy_pvalue(4.0 + 1e-9, universe, 1, {}, cfg);
  CHECK(u.p_bs == 0.0);
}

TEST_CASE("impossible significance requests raise") {
  std::vector<UniverseRow> universe = small_universe();
  SignificanceConfig cfg = quick_cfg(100);

  SUBCASE("more bets than universe rows") {
    try {
      random_strategy_pvalue(0.0, universe, 5, {}, cfg);
      FAIL("oversized draw not detected");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::universe_too_small);
    }
  }
  SUBCASE("nonpositive trial or bet counts") {
    SignificanceConfig bad = cfg;
    bad.trials = 0;
    CHECK_THROWS_AS(random_strategy_pvalue(0.0, universe, 2, {}, bad), Error);
    CHECK_THROWS_AS(random_strategy_pvalue(0.0, universe, 0, {}, cfg), Error);
    CHECK_THROWS_AS(random_strategy_pvalue(0.0, {}, 0, {}, cfg), Error);
  }
  SUBCASE("permuted staking needs one stake per bet") {
    SignificanceConfig p = cfg;
    p.staking = Staking::permuted;
    CHECK_THROWS_AS(random_strategy_pvalue(0.0, universe, 2, {1.0}, p), Error);
  }
  SUBCASE("all-zero permuted stakes cannot fund an roi trial") {
    SignificanceConfig p = cfg;
    p.staking = Staking::permuted;
    p.metric = Metric::roi;
    try {
      random_strategy_pvalue(0.0, universe, 2, {0.0, 0.0}, p);
      FAIL("zero investment not detected");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::zero_investment);
    }
  }
}

TEST_CASE("a ledger feeds the universe and the real metric") {
  BetLedger ledger;
  ledger.entries.push_back(make_entry("a", 2.0, 1, 0.5));   // +0.5
  ledger.entries.push_back(make_entry("b", 3.0, 0, 0.25));  // -0.25
  ledger.entries.push_back(make_entry("c", 1.8, 1, 0.0));   // eligible, unstaked
  ledger.entries.push_back(make_entry("d", 4.0, 0, 0.1));   // -0.1
  ledger.n_bets = 3;

  SignificanceConfig cfg = quick_cfg(2000, 5);
  SignificanceResult r = random_strategy_pvalue(ledger, cfg);
  CHECK(r.universe_size == 4);
  CHECK(r.n_bets == 3);
  // ROI of the real strategy as a fraction: 0.15 / 0.85.
  CHECK(r.real_value == doctest::Approx(0.15 / 0.85).epsilon(1e-12));

  // The overload must agree with the direct call on the same inputs.
  std::vector<UniverseRow> universe = {{2.0, 1}, {3.0, 0}, {1.8, 1}, {4.0, 0}};
  SignificanceResult direct =
      random_strategy_pvalue(0.15 / 0.85, universe, 3, {0.5, 0.25, 0.1}, cfg);
  CHECK(direct.trials_at_or_above == r.trials_at_or_above);

  SUBCASE("absolute return ledgers") {
    SignificanceConfig abs_cfg = cfg;
    abs_cfg.metric = Metric::absolute_return;
    SignificanceResult a = random_strategy_pvalue(ledger, abs_cfg);
    CHECK(a.real_value == doctest::Approx(0.15).epsilon(1e-12));
  }
  SUBCASE("a ledger with no stakes cannot anchor an roi") {
    BetLedger idle;
    idle.entries.push_back(make_entry("a", 2.0, 1, 0.0));
    idle.entries.push_back(make_entry("b", 3.0, 0, 0.0));
    idle.n_bets = 0;
    try {
      random_strategy_pvalue(idle, cfg);
      FAIL("zero investment not detected");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::zero_investment);
    }
  }
}

TEST_CASE("significance results serialize with their provenance") {
  std::vector<UniverseRow> universe = small_universe();
  SignificanceConfig cfg = quick_cfg(300, 99);
  cfg.staking = Staking::unit;
  cfg.metric = Metric::absolute_return;
  SignificanceResult r = random_strategy_pvalue(0.0, universe, 2, {}, cfg);
  CHECK(r.seed == 99);
  CHECK(r.trials == 300);

  const std::string j = r.to_json("bet365 competitive");
  CHECK(j.find("\"kind\": \"significance\"") != std::string::npos);
  CHECK(j.find("\"label\": \"bet365 competitive\"") != std::string::npos);
  CHECK(j.find("\"seed\": 99") != std::string::npos);
  CHECK(j.find("\"staking\": \"unit\"") != std::string::npos);
  CHECK(j.find("\"metric\": \"absolute_return\"") != std::string::npos);
  CHECK(j.find("\"p_bs\"") != std::string::npos);
  // No label key when none is given.
  CHECK(r.to_json().find("\"label\"") == std::string::npos);
}

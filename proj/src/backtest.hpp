#pragma once

#include <optional>
#include <string>
#include <vector>

#include "estimate.hpp"
#include "types.hpp"

namespace buzz {

// One endpoint-explicit interval over implied probability.
struct Interval {
  double lo = 0;
  double hi = 1;
  bool lo_open = false;
  bool hi_open = false;

  bool contains(double p) const;
  std::string text() const;
};

// "[0.4,0.6]" or unions like "(0,0.4)u(0.6,1)".
std::vector<Interval> parse_intervals(const std::string& text);
std::string intervals_text(const std::vector<Interval>& intervals);

// Complement within (0,1) of a sorted, non-overlapping union; endpoint
// openness flips, so the complement of [0.2,0.8] is (0,0.2)u(0.8,1).
std::vector<Interval> complement_intervals(const std::vector<Interval>& intervals);

// Comparisons run on p rounded to 9 decimals. Probabilities are recomputed
// here as 1/odds in double precision, so a quote of 1.25 lands exactly on a
// 0.8 endpoint; the rounding only absorbs noise below a nanounit, it does
// not forgive single-precision artifacts in stored inputs.
double round9(double p);

struct StrategyConfig {
  Model model = Model::pm;
  OddsSource bet_odds = OddsSource::bet365;
  std::vector<Interval> competitiveness;  // empty = no filter
  std::vector<std::string> excluded_row_keys;  // "id", "id:w" or "id:l"

  std::string to_json() const;
  static StrategyConfig from_json(const std::string& text);
};

struct BetRecord {
  std::string match_id;
  Side side = Side::winner;
  Date date;
  std::string player;
  std::string opponent;
  double y_tilde = 0;
  double odds = 0;      // betting source quote for this side
  std::optional<double> k;  // overround at the betting source, both sides quoted
  double f_star = 0;
  int y = 0;
  double profit = 0;
  double cumulative = 0;

  std::string row_key() const { return match_id + ":" + side_name(side); }
};

struct BetLedger {
  StrategyConfig config;
  std::vector<BetRecord> entries;  // every eligible row, in betting order
  long n_bets = 0;                 // entries with f_star > 0
  long pred_below_zero = 0;        // model probabilities outside [0,1]
  long pred_above_one = 0;

  long n_eligible() const { return long(entries.size()); }
};

struct ProfitShare {
  std::string row_key;
  Date date;
  double profit = 0;
};

struct StrategySummary {
  long n_odds = 0;
  long bets_placed = 0;
  std::optional<double> mean_overround_pct;
  double investment = 0;
  double absolute_return = 0;
  std::optional<double> roi_pct;  // unset when nothing was staked
  long pred_below_zero = 0;
  long pred_above_one = 0;
  std::vector<ProfitShare> top_bets;  // largest |profit| first

  std::string to_json(const std::string& label = "") const;
};

// Model win probability for one row; the linear model is reported as-is,
// values outside [0,1] are the caller's diagnostics, never clamped.
double predict_outcome(const RegressionFit& fit, const PlayerMatchRow& row);

// b = odds - 1; f* = max(y_tilde - (1 - y_tilde)/b, 0); no payoff, no bet.
double kelly_fraction(double y_tilde, double odds);

// Reset-bankroll settlement: profit = f*(odds - 1) on a win, -f* on a loss.
double settle_bet(double f_star, double odds, int y);

// Keeps rows whose modeling implied probability falls in any interval.
std::vector<PlayerMatchRow> apply_competitiveness(const std::vector<PlayerMatchRow>& rows,
                                                  const std::vector<Interval>& intervals);

std::vector<PlayerMatchRow> drop_row_keys(const std::vector<PlayerMatchRow>& rows,
                                          const std::vector<std::string>& keys);

// Walks eligible test rows chronologically (ties by match id, winner side
// first), sizes a Kelly bet per row against the configured odds source, and
// settles against the known outcome. Competitiveness and exclusions from the
// config are applied here.
BetLedger run_backtest(const RegressionFit& fit, const std::vector<PlayerMatchRow>& test_rows,
                       const StrategyConfig& config);

StrategySummary summarize(const BetLedger& ledger);

std::vector<std::pair<Date, double>> cumulative_series(const BetLedger& ledger);

void write_ledger_csv(const BetLedger& ledger, const std::string& path);

}  // namespace buzz

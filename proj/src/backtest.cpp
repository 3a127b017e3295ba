#include "backtest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>

#include "csv.hpp"
#include "errors.hpp"

namespace buzz {

using ordered_json = nlohmann::ordered_json;

double round9(double p) { return std::nearbyint(p * 1e9) / 1e9; }

bool Interval::contains(double p) const {
  double v = round9(p);
  if (v < lo || (lo_open && v == lo)) return false;
  if (v > hi || (hi_open && v == hi)) return false;
  return true;
}

namespace {

std::string num_text(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

}  // namespace

std::string Interval::text() const {
  return std::string(lo_open ? "(" : "[") + num_text(lo) + "," + num_text(hi) +
         (hi_open ? ")" : "]");
}

std::vector<Interval> parse_intervals(const std::string& text) {
  std::vector<Interval> out;
  size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == 'u' || text[pos] == 'U'))
      ++pos;
  };
  skip_ws();
  while (pos < text.size()) {
    Interval iv;
    char open = text[pos];
    if (open != '[' && open != '(')
      raise(Errc::parse, "interval must start with [ or ( at '" + text.substr(pos) + "'");
    iv.lo_open = open == '(';
    ++pos;
    size_t comma = text.find(',', pos);
    if (comma == std::string::npos) raise(Errc::parse, "interval missing comma: " + text);
    size_t close = text.find_first_of("])", comma);
    if (close == std::string::npos) raise(Errc::parse, "interval missing close bracket: " + text);
    iv.hi_open = text[close] == ')';
    auto lo = parse_double_field(text.substr(pos, comma - pos));
    auto hi = parse_double_field(text.substr(comma + 1, close - comma - 1));
    if (!lo || !hi) raise(Errc::parse, "interval endpoints must be numbers: " + text);
    iv.lo = *lo;
    iv.hi = *hi;
    if (!(iv.lo < iv.hi)) raise(Errc::parse, "interval endpoints out of order: " + text);
    if (iv.lo < 0 || iv.hi > 1) raise(Errc::parse, "interval must stay within [0,1]: " + text);
    out.push_back(iv);
    pos = close + 1;
    skip_ws();
  }
  if (out.empty()) raise(Errc::parse, "no intervals in '" + text + "'");
  return out;
}

std::string intervals_text(const std::vector<Interval>& intervals) {
  std::string out;
  for (const auto& iv : intervals) {
    if (!out.empty()) out += "u";
    out += iv.text();
  }
  return out;
}

std::vector<Interval> complement_intervals(const std::vector<Interval>& intervals) {
  std::vector<Interval> sorted = intervals;
  std::sort(sorted.begin(), sorted.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  double cur = 0;
  bool cur_open = true;  // 0 and 1 themselves are never implied probabilities here
  for (const auto& iv : sorted) {
    if (iv.lo > cur || (iv.lo == cur && iv.lo_open && !cur_open))
      out.push_back({cur, iv.lo, cur_open, !iv.lo_open});
    cur = iv.hi;
    cur_open = !iv.hi_open;
  }
  if (cur < 1) out.push_back({cur, 1, cur_open, true});
  return out;
}

std::string StrategyConfig::to_json() const {
  ordered_json j;
  j["model"] = model_name(model);
  j["bet_odds"] = odds_source_name(bet_odds);
  if (!competitiveness.empty()) j["competitiveness"] = intervals_text(competitiveness);
  if (!excluded_row_keys.empty()) j["excluded_row_keys"] = excluded_row_keys;
  return j.dump();
}

StrategyConfig StrategyConfig::from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) raise(Errc::parse, "strategy config is not valid JSON");
  StrategyConfig c;
  if (j.contains("model")) {
    auto m = model_from_name(j["model"].get<std::string>());
    if (!m) raise(Errc::parse, "unknown model in strategy config");
    c.model = *m;
  }
  if (j.contains("bet_odds")) {
    auto s = odds_source_from_name(j["bet_odds"].get<std::string>());
    if (!s) raise(Errc::parse, "unknown odds source in strategy config");
    c.bet_odds = *s;
  }
  if (j.contains("competitiveness") && !j["competitiveness"].get<std::string>().empty())
    c.competitiveness = parse_intervals(j["competitiveness"].get<std::string>());
  if (j.contains("excluded_row_keys"))
    c.excluded_row_keys = j["excluded_row_keys"].get<std::vector<std::string>>();
  return c;
}

double predict_outcome(const RegressionFit& fit, const PlayerMatchRow& row) {
  return fit.predict(row);
}

double kelly_fraction(double y_tilde, double odds) {
  if (!(odds >= 1.0))
    raise(Errc::bad_odds, "decimal odds must be >= 1, got " + std::to_string(odds));
  double b = odds - 1.0;
  if (b <= 0) return 0.0;
  return std::max(y_tilde - (1.0 - y_tilde) / b, 0.0);
}

double settle_bet(double f_star, double odds, int y) {
  return y ? f_star * odds - f_star : -f_star;
}

std::vector<PlayerMatchRow> apply_competitiveness(const std::vector<PlayerMatchRow>& rows,
                                                  const std::vector<Interval>& intervals) {
  if (intervals.empty()) return rows;
  std::vector<PlayerMatchRow> out;
  for (const auto& r : rows)
    for (const auto& iv : intervals)
      if (iv.contains(r.z)) {
        out.push_back(r);
        break;
      }
  return out;
}

std::vector<PlayerMatchRow> drop_row_keys(const std::vector<PlayerMatchRow>& rows,
                                          const std::vector<std::string>& keys) {
  if (keys.empty()) return rows;
  std::set<std::string> drop(keys.begin(), keys.end());
  std::vector<PlayerMatchRow> out;
  for (const auto& r : rows)
    if (!drop.count(r.match_id) && !drop.count(r.row_key())) out.push_back(r);
  return out;
}

BetLedger run_backtest(const RegressionFit& fit, const std::vector<PlayerMatchRow>& test_rows,
                       const StrategyConfig& config) {
  std::vector<PlayerMatchRow> rows = apply_competitiveness(test_rows, config.competitiveness);
  rows = drop_row_keys(rows, config.excluded_row_keys);

  std::stable_sort(rows.begin(), rows.end(), [](const PlayerMatchRow& a, const PlayerMatchRow& b) {
    if (a.date != b.date) return a.date < b.date;
    if (a.match_id != b.match_id) return a.match_id < b.match_id;
    return int(a.side) < int(b.side);
  });

  BetLedger ledger;
  ledger.config = config;
  double cumulative = 0;
  for (const auto& r : rows) {
    const RowOdds& quote = r.quote(config.bet_odds);
    if (!quote.z) continue;  // no usable quote, no potential bet

    BetRecord rec;
    rec.match_id = r.match_id;
    rec.side = r.side;
    rec.date = r.date;
    rec.player = r.player;
    rec.opponent = r.opponent;
    rec.y = r.y;
    rec.odds = *quote.odds;
    rec.k = quote.k;
    rec.y_tilde = predict_outcome(fit, r);
    if (rec.y_tilde < 0) ++ledger.pred_below_zero;
    if (rec.y_tilde > 1) ++ledger.pred_above_one;
    rec.f_star = kelly_fraction(rec.y_tilde, rec.odds);
    rec.profit = settle_bet(rec.f_star, rec.odds, rec.y);
    cumulative += rec.profit;
    rec.cumulative = cumulative;
    if (rec.f_star > 0) ++ledger.n_bets;
    ledger.entries.push_back(std::move(rec));
  }
  if (ledger.entries.empty())
    raise(Errc::empty_universe, "no eligible rows for odds source " +
                                    std::string(odds_source_name(config.bet_odds)));
  return ledger;
}

StrategySummary summarize(const BetLedger& ledger) {
  StrategySummary s;
  s.n_odds = ledger.n_eligible();
  s.bets_placed = ledger.n_bets;
  s.pred_below_zero = ledger.pred_below_zero;
  s.pred_above_one = ledger.pred_above_one;

  double k_sum = 0;
  long k_count = 0;
  for (const auto& e : ledger.entries) {
    s.investment += e.f_star;
    s.absolute_return += e.profit;
    if (e.k) {
      k_sum += *e.k;
      ++k_count;
    }
  }
  if (k_count) s.mean_overround_pct = 100.0 * k_sum / double(k_count);
  if (s.investment > 0) s.roi_pct = 100.0 * s.absolute_return / s.investment;

  std::vector<const BetRecord*> placed;
  for (const auto& e : ledger.entries)
    if (e.f_star > 0) placed.push_back(&e);
  std::stable_sort(placed.begin(), placed.end(), [](const BetRecord* a, const BetRecord* b) {
    return std::fabs(a->profit) > std::fabs(b->profit);
  });
  for (size_t i = 0; i < placed.size() && i < 10; ++i)
    s.top_bets.push_back({placed[i]->row_key(), placed[i]->date, placed[i]->profit});
  return s;
}

std::string StrategySummary::to_json(const std::string& label) const {
  ordered_json j;
  j["kind"] = "strategy_summary";
  if (!label.empty()) j["label"] = label;
  j["n_odds"] = n_odds;
  j["bets_placed"] = bets_placed;
  if (mean_overround_pct)
    j["mean_overround_pct"] = *mean_overround_pct;
  else
    j["mean_overround_pct"] = nullptr;
  j["investment"] = investment;
  j["absolute_return"] = absolute_return;
  if (roi_pct)
    j["roi_pct"] = *roi_pct;
  else
    j["roi_pct"] = nullptr;
  j["predictions_below_zero"] = pred_below_zero;
  j["predictions_above_one"] = pred_above_one;
  ordered_json top = ordered_json::array();
  for (const auto& t : top_bets)
    top.push_back({{"row", t.row_key}, {"date", t.date.iso()}, {"profit", t.profit}});
  j["top_bets"] = std::move(top);
  return j.dump(2);
}

std::vector<std::pair<Date, double>> cumulative_series(const BetLedger& ledger) {
  std::vector<std::pair<Date, double>> out;
  out.reserve(ledger.entries.size());
  for (const auto& e : ledger.entries) out.emplace_back(e.date, e.cumulative);
  return out;
}

void write_ledger_csv(const BetLedger& ledger, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io, "cannot write " + path);
  write_csv_row(out, {"match_id", "side", "date", "player", "opponent", "y", "odds", "overround",
                      "y_tilde", "f_star", "profit", "cumulative"});
  for (const auto& e : ledger.entries) {
    write_csv_row(out, {e.match_id, side_name(e.side), e.date.iso(), e.player, e.opponent,
                        std::to_string(e.y), num_text(e.odds), e.k ? num_text(*e.k) : "",
                        num_text(e.y_tilde), num_text(e.f_star), num_text(e.profit),
                        num_text(e.cumulative)});
  }
  out.close();
  if (!out) raise(Errc::io, "short write to " + path);
}

}  // namespace buzz

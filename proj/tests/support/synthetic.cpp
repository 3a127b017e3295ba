#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ingest.hpp"

namespace buzz::testing {

namespace {

std::string player_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "Player %03d", i + 1);
  return std::string(buf);
}

std::string tournament_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "Open %c", 'A' + i % 26);
  return std::string(buf);
}

}  // namespace

Dataset synthetic_dataset(const SyntheticOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  // Explicit mantissa draw: distribution classes vary between standard
  // libraries and this corpus must be byte-stable.
  auto unit = [](std::mt19937_64& g) { return double(g() >> 11) * 0x1.0p-53; };
  const long span = opts.end.serial() - opts.start.serial();
  const Date first_day = Date::from_ymd(2015, 7, 1);

  std::vector<MatchRecord> records;
  records.reserve(size_t(opts.n_matches) + 16);

  auto make_match = [&](long i) {
    MatchRecord m;
    m.date = opts.start + int(rng() % std::uint64_t(span + 1));
    m.tournament = tournament_name(int(rng() % std::uint64_t(opts.n_tournaments)));

    int a = int(rng() % std::uint64_t(opts.n_players));
    int b = int(rng() % std::uint64_t(opts.n_players - 1));
    if (b >= a) ++b;

    double sa = 1.0 / double(a + 1), sb = 1.0 / double(b + 1);
    double pa = sa / (sa + sb);
    pa = std::clamp(0.65 * pa + 0.35 * unit(rng), 0.08, 0.92);
    bool a_wins = unit(rng) < pa;
    int w = a_wins ? a : b;
    int l = a_wins ? b : a;
    double pw = a_wins ? pa : 1 - pa;

    m.player_w = player_name(w);
    m.player_l = player_name(l);
    m.rank_w = w + 1;
    m.rank_l = l + 1;

    double k = 0.04 + 0.03 * unit(rng);
    double zw = pw * (1 + k);
    double zl = (1 + k) - zw;
    zw = std::clamp(zw, 0.05, 1.02);
    zl = std::clamp(zl, 0.05, 1.02);
    double avg_w = 1.0 / zw, avg_l = 1.0 / zl;
    auto jitter = [&](double v, double mag) { return v * (1 + mag * (unit(rng) - 0.5)); };
    double b365_w = std::max(1.01, jitter(avg_w, 0.03));
    double b365_l = std::max(1.01, jitter(avg_l, 0.03));
    double max_w = std::max(b365_w, avg_w) * (1.005 + 0.01 * unit(rng));
    double max_l = std::max(b365_l, avg_l) * (1.005 + 0.01 * unit(rng));
    m.quote(OddsSource::bet365) = {b365_w, b365_l};
    m.quote(OddsSource::market_average) = {avg_w, avg_l};
    m.quote(OddsSource::market_best) = {max_w, max_l};

    auto views = [&] { return (long long)(8 + rng() % 400); };
    m.wiki_yesterday_w = views();
    m.wiki_yesterday_l = views();
    m.wiki_median_w = double(6 + rng() % 300);
    m.wiki_median_l = double(6 + rng() % 300);
    m.wiki_first_w = first_day;
    m.wiki_first_l = first_day;
    (void)i;
    return m;
  };

  for (long i = 0; i < opts.n_matches; ++i) records.push_back(make_match(i));

  if (opts.with_edge_cases && !records.empty()) {
    // Exact duplicate of the first match; normalization collapses it.
    records.push_back(records.front());

    MatchRecord m = make_match(-1);  // template for the defect variants
    // Variant dates start where profiles are already a year and a day old,
    // so each defect survives to the screening step built to catch it.
    const Date viable = std::max(opts.start, first_day + 366);
    auto fresh = [&](int day_offset) {
      MatchRecord r = m;
      r.date = viable + day_offset;
      return r;
    };

    MatchRecord above_best = fresh(3);
    above_best.player_w = player_name(opts.n_players - 2);
    above_best.player_l = player_name(opts.n_players - 1);
    above_best.quote(OddsSource::bet365).win =
        *above_best.quote(OddsSource::market_best).win + 0.5;
    records.push_back(above_best);

    MatchRecord miskeyed = fresh(4);
    miskeyed.player_w = player_name(0);
    miskeyed.player_l = player_name(opts.n_players - 1);
    miskeyed.quote(OddsSource::bet365).win = 0.8;  // kept as stored, unusable as a quote
    records.push_back(miskeyed);

    MatchRecord wild_best = fresh(5);
    wild_best.player_w = player_name(1);
    wild_best.player_l = player_name(opts.n_players - 1);
    wild_best.quote(OddsSource::market_best).win = 127.0;
    records.push_back(wild_best);

    MatchRecord no_avg = fresh(6);
    no_avg.player_w = player_name(2);
    no_avg.player_l = player_name(opts.n_players - 1);
    no_avg.quote(OddsSource::market_average) = {};
    records.push_back(no_avg);

    MatchRecord young = fresh(7);
    young.player_w = player_name(3);
    young.player_l = player_name(opts.n_players - 1);
    young.wiki_first_w = young.date + (-100);
    records.push_back(young);

    MatchRecord retired = fresh(8);
    retired.player_w = player_name(4);
    retired.player_l = player_name(opts.n_players - 1);
    retired.comment = "Retired";
    records.push_back(retired);

    MatchRecord unranked = fresh(9);
    unranked.player_w = player_name(5);
    unranked.player_l = player_name(opts.n_players - 1);
    unranked.rank_l.reset();
    records.push_back(unranked);

    MatchRecord quiet = fresh(10);
    quiet.player_w = player_name(6);
    quiet.player_l = player_name(opts.n_players - 1);
    quiet.wiki_yesterday_w = 0;
    records.push_back(quiet);
  }

  return std::move(normalize_dataset(std::move(records)).dataset);
}

}  // namespace buzz::testing

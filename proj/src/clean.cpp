#include "clean.hpp"

#include <cmath>
#include <json.hpp>
#include <set>

#include "errors.hpp"
#include "features.hpp"

namespace buzz {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string describe(const MatchRecord& m) {
  return m.date.iso() + " " + m.player_w + " v " + m.player_l + " (" + m.tournament_key + ")";
}

struct Trip {
  bool w = false;
  bool l = false;
  std::string detail;
  explicit operator bool() const { return w || l; }
};

// Shared removal plumbing: a predicate marks sides of a match, removal is
// whole-match so the two-rows-per-match invariant survives cleaning.
template <typename Pred>
StepResult apply_filter(const Dataset& ds, const char* kind, Pred&& pred) {
  StepResult out;
  out.kept.duplicates_collapsed = ds.duplicates_collapsed;
  out.kept.source_files = ds.source_files;
  for (const auto& m : ds.matches) {
    Trip t = pred(m);
    if (!t) {
      out.kept.matches.push_back(m);
      continue;
    }
    out.rows_removed += 2;
    for (Side s : {Side::winner, Side::loser})
      out.flags.push_back({m.match_id + ":" + side_name(s), kind,
                           describe(m) + ": " + t.detail});
  }
  return out;
}

}  // namespace

StepResult filter_new_players(const Dataset& ds) {
  return apply_filter(ds, "YoungProfile", [](const MatchRecord& m) {
    Trip t;
    auto young = [&](const std::optional<Date>& first) {
      return !first || (m.date - *first) < 366;
    };
    t.w = young(m.wiki_first_w);
    t.l = young(m.wiki_first_l);
    if (t) {
      auto text = [&](const std::optional<Date>& first) {
        return first ? "first pageview day " + first->iso() : std::string("first pageview day unknown");
      };
      t.detail = t.w ? text(m.wiki_first_w) : text(m.wiki_first_l);
    }
    return t;
  });
}

StepResult filter_bet365_above_best(const Dataset& ds) {
  return apply_filter(ds, "SingleBookAboveBest", [](const MatchRecord& m) {
    Trip t;
    const auto& b = m.quote(OddsSource::bet365);
    const auto& x = m.quote(OddsSource::market_best);
    t.w = b.win && x.win && *b.win > *x.win;
    t.l = b.lose && x.lose && *b.lose > *x.lose;
    if (t) {
      char buf[96];
      double bv = t.w ? *b.win : *b.lose;
      double xv = t.w ? *x.win : *x.lose;
      std::snprintf(buf, sizeof(buf), "bookmaker %.2f above best %.2f on %s side", bv, xv,
                    t.w ? "winner" : "loser");
      t.detail = buf;
    }
    return t;
  });
}

StepResult filter_missing(const Dataset& ds) {
  return apply_filter(ds, "MissingOdds", [](const MatchRecord& m) {
    Trip t;
    for (OddsSource s :
         {OddsSource::bet365, OddsSource::market_average, OddsSource::market_best}) {
      const auto& q = m.quote(s);
      if (!q.win) t.w = true;
      if (!q.lose) t.l = true;
      if (!q.complete()) {
        if (t.detail.empty())
          t.detail = std::string("no ") + odds_source_name(s) + " quote on " +
                     (!q.win ? "winner" : "loser") + " side";
      }
    }
    return t;
  });
}

StepResult filter_best_odds_outliers(const Dataset& ds, std::optional<double> sigma,
                                     double* sigma_used) {
  // d = |1/best - 1/avg| per side, pooled over every side where both quotes
  // exist; the outlier rule compares each side's d to the pooled mean.
  std::vector<double> ds_all;
  auto side_d = [](const MatchRecord& m, bool w) -> std::optional<double> {
    const auto& best = m.quote(OddsSource::market_best);
    const auto& avg = m.quote(OddsSource::market_average);
    const auto& bv = w ? best.win : best.lose;
    const auto& av = w ? avg.win : avg.lose;
    if (!bv || !av) return std::nullopt;
    // Raw reciprocals, not validated probabilities: the audit runs on the
    // numbers as stored, including miskeyed quotes below 1.
    return std::fabs(1.0 / *bv - 1.0 / *av);
  };
  for (const auto& m : ds.matches)
    for (bool w : {true, false})
      if (auto d = side_d(m, w)) ds_all.push_back(*d);

  double mean = 0;
  for (double d : ds_all) mean += d;
  if (!ds_all.empty()) mean /= double(ds_all.size());

  double sd;
  if (sigma) {
    sd = *sigma;
  } else {
    double ss = 0;
    for (double d : ds_all) ss += (d - mean) * (d - mean);
    sd = ds_all.size() > 1 ? std::sqrt(ss / double(ds_all.size() - 1)) : 0.0;
    if (sd == 0.0) {
      for (double d : ds_all)
        if (d != mean)
          raise(Errc::degenerate_spread, "spread of best-vs-average gaps is zero but gaps differ");
    }
  }
  if (sigma_used) *sigma_used = sd;

  return apply_filter(ds, "BestOddsOutlier", [&](const MatchRecord& m) {
    Trip t;
    auto check = [&](bool w) {
      auto d = side_d(m, w);
      return d && std::fabs(*d - mean) > 4.0 * sd;
    };
    t.w = check(true);
    t.l = check(false);
    if (t) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "best-vs-average gap %.4f beyond 4 sigma of mean %.4f",
                    *side_d(m, t.w), mean);
      t.detail = buf;
    }
    return t;
  });
}

CleanResult run_pipeline(const Dataset& ds, const CleanOptions& opts) {
  CleanResult out;
  out.dataset = ds;

  auto record = [&](int number, const char* name, auto&& run) {
    CleaningStep step;
    step.name = name;
    step.rows_before = out.dataset.n_rows();
    if (opts.skip_steps.count(number)) {
      step.name += " (skipped)";
      out.report.steps.push_back(std::move(step));
      return;
    }
    StepResult r = run(out.dataset);
    step.rows_removed = r.rows_removed;
    std::set<std::string> seen;
    for (const auto& f : r.flags) {
      std::string match = f.detail.substr(0, f.detail.find(": "));
      if (step.exemplars.size() < 3 && seen.insert(match).second)
        step.exemplars.push_back(f.detail);
    }
    out.dataset = std::move(r.kept);
    out.flags.insert(out.flags.end(), r.flags.begin(), r.flags.end());
    out.report.steps.push_back(std::move(step));
  };

  record(1, "new players", [](const Dataset& d) { return filter_new_players(d); });
  record(2, "single bookmaker above best", [](const Dataset& d) { return filter_bet365_above_best(d); });
  record(3, "missing odds", [](const Dataset& d) { return filter_missing(d); });
  record(4, "best odds outliers", [&](const Dataset& d) {
    double used = 0;
    StepResult r = filter_best_odds_outliers(d, opts.sigma, &used);
    out.report.sigma_used = used;
    return r;
  });

  out.report.rows_final = out.dataset.n_rows();
  out.report.matches_final = out.dataset.n_matches();
  out.report.players_final = out.dataset.n_players();
  return out;
}

Dataset exclude_rows(const Dataset& ds, const std::vector<std::string>& match_ids) {
  std::set<std::string> ids(match_ids.begin(), match_ids.end());
  for (const auto& id : ids) {
    bool found = false;
    for (const auto& m : ds.matches)
      if (m.match_id == id) {
        found = true;
        break;
      }
    if (!found) raise(Errc::unknown_match_id, "no match with id " + id);
  }
  Dataset out;
  out.duplicates_collapsed = ds.duplicates_collapsed;
  out.source_files = ds.source_files;
  for (const auto& m : ds.matches)
    if (!ids.count(m.match_id)) out.matches.push_back(m);
  return out;
}

std::vector<AnomalyFlag> scan_anomalies(const Dataset& ds, std::optional<double> sigma) {
  std::vector<AnomalyFlag> flags;
  StepResult s1 = filter_new_players(ds);
  flags.insert(flags.end(), s1.flags.begin(), s1.flags.end());
  StepResult s2 = filter_bet365_above_best(s1.kept);
  flags.insert(flags.end(), s2.flags.begin(), s2.flags.end());
  StepResult s3 = filter_missing(s2.kept);
  flags.insert(flags.end(), s3.flags.begin(), s3.flags.end());
  StepResult s4 = filter_best_odds_outliers(s3.kept, sigma, nullptr);
  flags.insert(flags.end(), s4.flags.begin(), s4.flags.end());
  return flags;
}

std::string CleaningReport::to_json() const {
  ordered_json j;
  j["kind"] = "cleaning_report";
  ordered_json steps = ordered_json::array();
  for (const auto& s : this->steps)
    steps.push_back({{"name", s.name},
                     {"rows_before", s.rows_before},
                     {"rows_removed", s.rows_removed},
                     {"exemplars", s.exemplars}});
  j["steps"] = std::move(steps);
  if (sigma_used) j["sigma_used"] = *sigma_used;
  j["rows_final"] = rows_final;
  j["matches_final"] = matches_final;
  j["players_final"] = players_final;
  return j.dump(2);
}

}  // namespace buzz

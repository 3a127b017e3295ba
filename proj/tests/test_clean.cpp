#include <doctest.h>

#include <algorithm>
#include <set>

#include "clean.hpp"
#include "errors.hpp"
#include "ingest.hpp"
#include "synthetic.hpp"

using namespace buzz;

namespace {

std::string fixture_path(const char* name) {
  return std::string(BZB_FIXTURE_DIR) + "/" + name;
}

Dataset mini_dataset() {
  auto records = parse_match_path(fixture_path("mini_matches.csv"), Schema());
  return std::move(normalize_dataset(std::move(records)).dataset);
}

std::string id_of(const Dataset& ds, const std::string& winner) {
  for (const auto& m : ds.matches)
    if (m.player_w == winner) return m.match_id;
  return "";
}

bool has_winner(const Dataset& ds, const std::string& winner) {
  return !id_of(ds, winner).empty();
}

long flags_of_kind(const std::vector<AnomalyFlag>& flags, const std::string& kind) {
  return std::count_if(flags.begin(), flags.end(),
                       [&](const AnomalyFlag& f) { return f.kind == kind; });
}

}  // namespace

TEST_CASE("young profile filter needs a year and a day of history") {
  auto base = [](Date first_w) {
    MatchRecord m;
    m.date = Date::from_ymd(2018, 6, 1);
    m.tournament = "Boundary Open";
    m.player_w = "A";
    m.player_l = "B";
    m.wiki_first_w = first_w;
    m.wiki_first_l = Date::from_ymd(2015, 7, 1);
    return m;
  };
  Date match_day = Date::from_ymd(2018, 6, 1);

  SUBCASE("exactly 366 days of history passes") {
    Dataset ds = normalize_dataset({base(match_day - 366)}).dataset;
    StepResult r = filter_new_players(ds);
    CHECK(r.kept.n_matches() == 1);
    CHECK(r.rows_removed == 0);
  }
  SUBCASE("365 days is one short") {
    Dataset ds = normalize_dataset({base(match_day - 365)}).dataset;
    StepResult r = filter_new_players(ds);
    CHECK(r.kept.n_matches() == 0);
    CHECK(r.rows_removed == 2);
    REQUIRE(r.flags.size() == 2);
    CHECK(r.flags[0].kind == "YoungProfile");
    CHECK(r.flags[0].row_key.substr(17) == "w");
    CHECK(r.flags[1].row_key.substr(17) == "l");
  }
  SUBCASE("an unknown first day counts as young") {
    MatchRecord m = base(match_day - 400);
    m.wiki_first_l.reset();
    Dataset ds = normalize_dataset({m}).dataset;
    CHECK(filter_new_players(ds).kept.n_matches() == 0);
  }
}

TEST_CASE("cleaning pipeline on the hand-checked corpus") {
  Dataset ds = mini_dataset();
  REQUIRE(ds.n_matches() == 10);

  SUBCASE("sigma estimated from the data is blown up by the planted outlier") {
    // Twelve gap observations are too few: the 127.0 quote inflates the
    // spread estimate past its own deviation, and nothing is 4 sigma out.
    CleanResult r = run_pipeline(ds, {});
    REQUIRE(r.report.steps.size() == 4);
    CHECK(r.report.steps[3].rows_removed == 0);
    CHECK(has_winner(r.dataset, "Keys M."));
  }

  CleanOptions opts;
  opts.sigma = 0.02;  // pins the spread so the planted outlier is caught
  CleanResult r = run_pipeline(ds, opts);

  REQUIRE(r.report.steps.size() == 4);
  // Step 1: the Yastremska profile is 123 days old.
  CHECK(r.report.steps[0].name == "new players");
  CHECK(r.report.steps[0].rows_before == 20);
  CHECK(r.report.steps[0].rows_removed == 2);
  // Step 2: Osaka quoted 3.6 by the single book against a 3.1 market best.
  CHECK(r.report.steps[1].rows_before == 18);
  CHECK(r.report.steps[1].rows_removed == 2);
  // Step 3: Halep has no market average, Kvitova no single-book quote.
  CHECK(r.report.steps[2].rows_before == 16);
  CHECK(r.report.steps[2].rows_removed == 4);
  // Step 4: the 127.0 best quote on the Keys match.
  CHECK(r.report.steps[3].rows_before == 12);
  CHECK(r.report.steps[3].rows_removed == 2);
  CHECK(r.report.sigma_used == 0.02);

  CHECK(r.report.rows_final == 10);
  CHECK(r.report.matches_final == 5);
  CHECK(r.dataset.n_matches() == 5);
  for (const char* gone : {"Yastremska D.", "Osaka N.", "Halep S.", "Kvitova P.", "Keys M."})
    CHECK(!has_winner(r.dataset, gone));
  // The miskeyed sub-1 quote is not a removal reason anywhere: the Sharapova
  // match survives the audit untouched.
  CHECK(has_winner(r.dataset, "Sharapova M."));
  CHECK(has_winner(r.dataset, "Radwanska A."));

  SUBCASE("flag details describe the offence") {
    CHECK(flags_of_kind(r.flags, "YoungProfile") == 2);
    CHECK(flags_of_kind(r.flags, "SingleBookAboveBest") == 2);
    CHECK(flags_of_kind(r.flags, "MissingOdds") == 4);
    CHECK(flags_of_kind(r.flags, "BestOddsOutlier") == 2);
    auto above = std::find_if(r.flags.begin(), r.flags.end(), [](const AnomalyFlag& f) {
      return f.kind == "SingleBookAboveBest";
    });
    REQUIRE(above != r.flags.end());
    CHECK(above->detail.find("3.60") != std::string::npos);
    CHECK(above->detail.find("3.10") != std::string::npos);
    CHECK(above->detail.find("Osaka N.") != std::string::npos);
  }

  SUBCASE("exemplars name the removed matches") {
    REQUIRE(!r.report.steps[1].exemplars.empty());
    CHECK(r.report.steps[1].exemplars[0].find("Osaka N.") != std::string::npos);
    CHECK(r.report.steps[2].exemplars.size() == 2);
  }

  SUBCASE("report json carries the audit trail") {
    std::string j = r.report.to_json();
    CHECK(j.find("\"cleaning_report\"") != std::string::npos);
    CHECK(j.find("\"sigma_used\": 0.02") != std::string::npos);
    CHECK(j.find("\"matches_final\": 5") != std::string::npos);
  }
}

TEST_CASE("skipped steps leave the data alone") {
  Dataset ds = mini_dataset();
  CleanOptions opts;
  opts.skip_steps = {1, 2, 3};
  opts.sigma = 0.02;
  CleanResult r = run_pipeline(ds, opts);
  REQUIRE(r.report.steps.size() == 4);
  CHECK(r.report.steps[0].name == "new players (skipped)");
  CHECK(r.report.steps[0].rows_removed == 0);
  CHECK(r.report.steps[2].rows_removed == 0);
  // Step 4 now sees matches the earlier steps would have removed; the missing
  // average sides simply contribute no gap observation.
  CHECK(r.report.steps[3].rows_before == 20);
  CHECK(r.dataset.n_matches() >= 8);
}

TEST_CASE("cleaning the synthetic corpus end to end") {
  testing::SyntheticOptions opts;
  opts.with_edge_cases = true;
  Dataset ds = testing::synthetic_dataset(opts);
  // 400 generated + 8 defect variants; the duplicate collapses at build time.
  REQUIRE(ds.n_matches() == 408);
  REQUIRE(ds.duplicates_collapsed == 1);

  CleanResult r = run_pipeline(ds, {});
  REQUIRE(r.report.steps.size() == 4);
  // Every profile is born 2015-07-01, so the 59 generated matches played
  // before 2016-07-01 sit inside the age screen's shadow along with the
  // planted 100-day-old profile.
  CHECK(r.report.steps[0].rows_removed == 120);
  CHECK(r.report.steps[1].rows_removed == 2);  // single book 0.5 above best
  CHECK(r.report.steps[2].rows_removed == 2);  // missing market average
  CHECK(r.report.steps[3].rows_removed == 2);  // the 127.0 best quote
  CHECK(r.dataset.n_matches() == 345);
  CHECK(r.report.rows_final == 690);
  CHECK(r.report.sigma_used.has_value());
  CHECK(*r.report.sigma_used > 0);
  CHECK(*r.report.sigma_used < 0.1);

  SUBCASE("rerunning with the pinned spread removes nothing further") {
    CleanOptions again;
    again.sigma = r.report.sigma_used;
    CleanResult r2 = run_pipeline(r.dataset, again);
    for (const auto& step : r2.report.steps) CHECK(step.rows_removed == 0);
    CHECK(r2.dataset.n_matches() == r.dataset.n_matches());
    CHECK(r2.dataset.fingerprint() == r.dataset.fingerprint());
  }

  SUBCASE("scan reports without removing") {
    std::string before = ds.fingerprint();
    auto flags = scan_anomalies(ds, {});
    CHECK(ds.fingerprint() == before);
    CHECK(flags_of_kind(flags, "YoungProfile") == 120);
    CHECK(flags_of_kind(flags, "SingleBookAboveBest") == 2);
    CHECK(flags_of_kind(flags, "MissingOdds") == 2);
    CHECK(flags_of_kind(flags, "BestOddsOutlier") == 2);
    // Scan flags and pipeline flags agree row for row.
    CleanResult piped = run_pipeline(ds, {});
    REQUIRE(flags.size() == piped.flags.size());
    for (size_t i = 0; i < flags.size(); ++i) {
      CHECK(flags[i].row_key == piped.flags[i].row_key);
      CHECK(flags[i].kind == piped.flags[i].kind);
    }
  }
}

TEST_CASE("degenerate gap spreads") {
  SUBCASE("identical gaps estimate zero spread and remove nothing") {
    std::vector<MatchRecord> records;
    for (int i = 0; i < 3; ++i) {
      MatchRecord m;
      m.date = Date::from_ymd(2018, 5, 1 + i);
      m.tournament = "Flat Open";
      m.player_w = "W" + std::to_string(i);
      m.player_l = "L" + std::to_string(i);
      m.quote(OddsSource::market_average) = {2.0, 2.0};
      m.quote(OddsSource::market_best) = {2.0, 2.0};
      m.quote(OddsSource::bet365) = {1.9, 1.9};
      records.push_back(m);
    }
    Dataset ds = normalize_dataset(std::move(records)).dataset;
    double used = -1;
    StepResult r = filter_best_odds_outliers(ds, {}, &used);
    CHECK(used == 0.0);
    CHECK(r.kept.n_matches() == 3);
    CHECK(r.rows_removed == 0);
  }
  SUBCASE("empty input is fine") {
    CleanResult r = run_pipeline(Dataset{}, {});
    CHECK(r.report.rows_final == 0);
    CHECK(r.report.steps.size() == 4);
  }
}

TEST_CASE("excluding matches by id") {
  Dataset ds = mini_dataset();
  std::string keys_id = id_of(ds, "Keys M.");
  REQUIRE(!keys_id.empty());

  Dataset out = exclude_rows(ds, {keys_id});
  CHECK(out.n_matches() == 9);
  CHECK(!has_winner(out, "Keys M."));
  CHECK(has_winner(out, "Radwanska A."));

  SUBCASE("duplicate ids in one request collapse") {
    Dataset twice = exclude_rows(ds, {keys_id, keys_id});
    CHECK(twice.n_matches() == 9);
  }
  SUBCASE("unknown ids are an error, not a no-op") {
    try {
      exclude_rows(ds, {"0123456789abcdef"});
      FAIL("expected unknown_match_id");
    } catch (const Error& err) {
      CHECK(err.code() == Errc::unknown_match_id);
      CHECK(std::string(err.what()).find("0123456789abcdef") != std::string::npos);
    }
  }
}

#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "ingest.hpp"
#include "tempdir.hpp"

using namespace buzz;
using buzz::testing::TempDir;

namespace {

std::string fixture_path(const char* name) {
  return std::string(BZB_FIXTURE_DIR) + "/" + name;
}

Dataset mini_dataset() {
  auto records = parse_match_path(fixture_path("mini_matches.csv"), Schema());
  return std::move(normalize_dataset(std::move(records)).dataset);
}

const MatchRecord& match_of(const Dataset& ds, const std::string& winner) {
  for (const auto& m : ds.matches)
    if (m.player_w == winner) return m;
  REQUIRE_MESSAGE(false, ("no match won by " + winner).c_str());
  return ds.matches.front();
}

}  // namespace

TEST_CASE("raw match file parsing") {
  auto records = parse_match_path(fixture_path("mini_matches.csv"), Schema());
  CHECK(records.size() == 11);

  SUBCASE("numeric damage becomes missing, never zero") {
    // The Kvitova row: junk single-book quote, impossible rank, negative median.
    auto it = std::find_if(records.begin(), records.end(),
                           [](const MatchRecord& m) { return m.player_w == "Kvitova P."; });
    REQUIRE(it != records.end());
    CHECK(!it->quote(OddsSource::bet365).win);
    CHECK(it->quote(OddsSource::bet365).lose == 1.9);
    CHECK(!it->rank_w);
    CHECK(it->rank_l == 85);
    CHECK(!it->wiki_median_w);
    CHECK(it->wiki_median_l == 35.0);
  }

  SUBCASE("sub-1 odds are kept exactly as stored") {
    auto it = std::find_if(records.begin(), records.end(),
                           [](const MatchRecord& m) { return m.player_w == "Sharapova M."; });
    REQUIRE(it != records.end());
    CHECK(it->quote(OddsSource::bet365).win == 0.800000011920929);
  }

  SUBCASE("float-formatted ranks and empty ranks") {
    auto it = std::find_if(records.begin(), records.end(),
                           [](const MatchRecord& m) { return m.player_w == "Kenin S."; });
    REQUIRE(it != records.end());
    CHECK(it->rank_w == 33);
    CHECK(!it->rank_l);
  }

  SUBCASE("profile first days parse as iso regardless of the match date format") {
    auto it = std::find_if(records.begin(), records.end(),
                           [](const MatchRecord& m) { return m.player_w == "Yastremska D."; });
    REQUIRE(it != records.end());
    CHECK(it->wiki_first_w == Date::from_ymd(2017, 10, 1));
    CHECK(it->wiki_first_l == Date::from_ymd(2015, 7, 1));
  }
}

TEST_CASE("parsing failures name their location") {
  SUBCASE("missing required column") {
    try {
      parse_match_file("Date,Tournament,Winner\n01/01/2018,X,A\n", Schema());
      FAIL("expected missing_column");
    } catch (const Error& err) {
      CHECK(err.code() == Errc::missing_column);
      CHECK(std::string(err.what()).find("Loser") != std::string::npos);
    }
  }
  SUBCASE("a column listed optional may be absent") {
    Schema s;
    std::string header = "Date,Tournament,Winner,Loser,WRank,LRank,B365W,B365L,AvgW,AvgL,MaxW,MaxL";
    auto records = parse_match_file(header + "\n02/01/2018,X,A,B,1,2,1.5,2.5,1.5,2.5,1.6,2.6\n", s);
    REQUIRE(records.size() == 1);
    CHECK(records[0].comment.empty());
    CHECK(!records[0].wiki_yesterday_w);
  }
  SUBCASE("bad date names the 1-based file row") {
    std::string header =
        "Date,Tournament,Winner,Loser,WRank,LRank,B365W,B365L,AvgW,AvgL,MaxW,MaxL\n";
    std::string good = "02/01/2018,X,A,B,1,2,1.5,2.5,1.5,2.5,1.6,2.6\n";
    try {
      parse_match_file(header + good + "oops,X,A,B,1,2,1.5,2.5,1.5,2.5,1.6,2.6\n", Schema());
      FAIL("expected bad_date");
    } catch (const Error& err) {
      CHECK(err.code() == Errc::bad_date);
      CHECK(std::string(err.what()).find("row 3") != std::string::npos);
    }
  }
}

TEST_CASE("schema json overrides") {
  Schema s = Schema::from_json(R"({
    "delimiter": ";",
    "date_format": "iso",
    "columns": {"winner": "W", "loser": "L"}
  })");
  CHECK(s.delimiter == ';');
  CHECK(s.date_format == DateFormat::iso);
  CHECK(s.winner == "W");
  CHECK(s.loser == "L");
  CHECK(s.tournament == "Tournament");

  CHECK_THROWS_AS(Schema::from_json("{\"delimiter\": \"ab\"}"), Error);
  CHECK_THROWS_AS(Schema::from_json("{\"date_format\": \"julian\"}"), Error);
  CHECK_THROWS_AS(Schema::from_json("{\"columns\": {\"nickname\": \"N\"}}"), Error);
  CHECK_THROWS_AS(Schema::from_json("not json"), Error);
}

TEST_CASE("normalization derives ids and collapses duplicates") {
  auto records = parse_match_path(fixture_path("mini_matches.csv"), Schema());
  NormalizeResult norm = normalize_dataset(std::move(records));
  const Dataset& ds = norm.dataset;

  CHECK(ds.n_matches() == 10);
  CHECK(ds.duplicates_collapsed == 1);
  CHECK(ds.n_rows() == 20);
  CHECK(ds.n_players() == 20);
  REQUIRE(norm.warnings.size() == 1);
  CHECK(norm.warnings[0].find("duplicate") != std::string::npos);

  SUBCASE("sorted by date then key then players") {
    CHECK(std::is_sorted(ds.matches.begin(), ds.matches.end(),
                         [](const MatchRecord& a, const MatchRecord& b) {
                           return std::tie(a.date, a.tournament_key, a.player_w, a.player_l) <
                                  std::tie(b.date, b.tournament_key, b.player_w, b.player_l);
                         }));
    CHECK(ds.matches.front().player_w == "Radwanska A.");
    CHECK(ds.matches.back().player_w == "Kvitova P.");
  }

  SUBCASE("duplicate keeps the first occurrence in sorted order") {
    const auto& m = match_of(ds, "Radwanska A.");
    // The retained copy is the one quoted 1.75, not the 1.9 duplicate.
    CHECK(m.quote(OddsSource::bet365).win == 1.75);
  }

  SUBCASE("ids are 16 hex chars, equal only for identical content keys") {
    for (const auto& m : ds.matches) {
      CHECK(m.match_id.size() == 16);
      for (char c : m.match_id) CHECK(std::isxdigit(static_cast<unsigned char>(c)));
    }
    CHECK(match_of(ds, "Halep S.").match_id != match_of(ds, "Osaka N.").match_id);
  }

  SUBCASE("season and tournament key derivation") {
    const auto& m = match_of(ds, "Muguruza G.");
    CHECK(m.season == 2018);
    CHECK(m.tournament_key == "Doha Classic 2018");
  }

  SUBCASE("dates outside the study window warn") {
    std::string header =
        "Date,Tournament,Winner,Loser,WRank,LRank,B365W,B365L,AvgW,AvgL,MaxW,MaxL\n";
    auto old = parse_match_file(header + "02/01/2014,X,A,B,1,2,1.5,2.5,1.5,2.5,1.6,2.6\n", Schema());
    NormalizeResult n2 = normalize_dataset(std::move(old));
    REQUIRE(n2.warnings.size() == 1);
    CHECK(n2.warnings[0].find("outside") != std::string::npos);
  }
}

TEST_CASE("completion filter keeps empty and Completed comments") {
  Dataset ds = mini_dataset();
  Dataset done = filter_completed(ds);
  CHECK(done.n_matches() == 9);
  for (const auto& m : done.matches) CHECK(m.player_w != "Pliskova K.");
}

TEST_CASE("directed row construction and per-reason exclusions") {
  Dataset done = filter_completed(mini_dataset());

  SUBCASE("modeling on the market average") {
    RowBuildResult built = to_player_rows(done, OddsSource::market_average);
    CHECK(built.rows.size() == 12);
    CHECK(built.excluded["missing_model_odds"] == 2);     // no average quotes at all
    CHECK(built.excluded["missing_attention"] == 2);      // negative median dropped at parse
    CHECK(built.excluded["nonpositive_attention"] == 2);  // zero views the day before
    CHECK(built.excluded.count("invalid_model_odds") == 0);

    const PlayerMatchRow* rw = nullptr;
    const PlayerMatchRow* rl = nullptr;
    for (const auto& r : built.rows) {
      if (r.player == "Radwanska A.") rw = &r;
      if (r.player == "Konta J.") rl = &r;
    }
    REQUIRE(rw);
    REQUIRE(rl);
    CHECK(rw->match_id == rl->match_id);
    CHECK(rw->y == 1);
    CHECK(rl->y == 0);
    CHECK(rw->z == doctest::Approx(1 / 1.8));
    CHECK(rl->z == doctest::Approx(1 / 2.1));
    CHECK(rw->e == doctest::Approx(1 - 1 / 1.8));
    CHECK(rl->e == doctest::Approx(-1 / 2.1));
    // Winner ranked 12 against 9: the weaker side, positive distance.
    CHECK(rw->rank_dist == doctest::Approx(1.0 / 9 - 1.0 / 12));
    CHECK(rl->rank_dist == doctest::Approx(-(1.0 / 9 - 1.0 / 12)));
    CHECK(rw->wikibuzz == doctest::Approx(std::log(150.0 / 80) - std::log(300.0 / 120)));
    CHECK(rw->wikibuzz == doctest::Approx(-rl->wikibuzz));
    CHECK(rw->quote(OddsSource::bet365).odds == 1.75);
    CHECK(rw->quote(OddsSource::market_best).k ==
          doctest::Approx(1 / 1.85 + 1 / 2.2 - 1));
    CHECK(rw->opponent == "Konta J.");

    // The miskeyed quote rides along but never becomes a probability.
    const PlayerMatchRow* miskeyed = nullptr;
    for (const auto& r : built.rows)
      if (r.player == "Sharapova M.") miskeyed = &r;
    REQUIRE(miskeyed);
    CHECK(miskeyed->quote(OddsSource::bet365).odds == 0.800000011920929);
    CHECK(!miskeyed->quote(OddsSource::bet365).z);
    CHECK(!miskeyed->quote(OddsSource::bet365).k);
    CHECK(miskeyed->quote(OddsSource::market_average).k ==
          doctest::Approx(1 / 1.42 + 1 / 2.9 - 1));

    // Unranked opponents contribute zero inverse rank.
    const PlayerMatchRow* kenin = nullptr;
    for (const auto& r : built.rows)
      if (r.player == "Kenin S.") kenin = &r;
    REQUIRE(kenin);
    CHECK(kenin->rank_dist == doctest::Approx(-1.0 / 33));
  }

  SUBCASE("modeling on the single book meets the miskeyed quote") {
    RowBuildResult built = to_player_rows(done, OddsSource::bet365);
    CHECK(built.rows.size() == 13);
    CHECK(built.excluded["invalid_model_odds"] == 1);
    CHECK(built.excluded["missing_model_odds"] == 1);
    CHECK(built.excluded["missing_attention"] == 1);
    CHECK(built.excluded["nonpositive_attention"] == 2);
    for (const auto& r : built.rows) {
      CHECK(r.z >= 0.0);
      CHECK(r.z <= 1.0);
    }
  }
}

TEST_CASE("sample split boundaries are inclusive on both window ends") {
  Dataset done = filter_completed(mini_dataset());
  auto rows = to_player_rows(done, OddsSource::market_average).rows;
  // Mini corpus spans 2018-01-15 .. 2018-02-05.
  SplitResult split = split_samples(rows, Date::from_ymd(2018, 1, 22), Date::from_ymd(2018, 2, 5),
                                    Date::from_ymd(2018, 1, 1));
  CHECK(split.train.size() == 8);  // through the Sharapova match inclusive
  CHECK(split.test.size() == 4);
  for (const auto& r : split.train) CHECK(r.date <= Date::from_ymd(2018, 1, 22));
  for (const auto& r : split.test) CHECK(r.date > Date::from_ymd(2018, 1, 22));

  SUBCASE("train_start cuts earlier rows out entirely") {
    SplitResult late = split_samples(rows, Date::from_ymd(2018, 1, 22), Date::from_ymd(2018, 2, 5),
                                     Date::from_ymd(2018, 1, 16));
    CHECK(late.train.size() == 6);
  }
  SUBCASE("degenerate windows refuse") {
    CHECK_THROWS_AS(
        split_samples(rows, Date::from_ymd(2018, 2, 5), Date::from_ymd(2018, 1, 22)), Error);
    // Empty test window.
    CHECK_THROWS_AS(
        split_samples(rows, Date::from_ymd(2018, 2, 5), Date::from_ymd(2018, 2, 6)), Error);
  }
}

TEST_CASE("canonical csv round-trips the dataset exactly") {
  TempDir tmp;
  Dataset ds = mini_dataset();
  std::string path = (tmp.path / "canonical.csv").string();
  write_canonical_csv(ds, path);
  Dataset back = read_canonical_csv(path);

  CHECK(back.n_matches() == ds.n_matches());
  CHECK(back.fingerprint() == ds.fingerprint());
  REQUIRE(back.matches.size() == ds.matches.size());
  for (size_t i = 0; i < ds.matches.size(); ++i) {
    CHECK(back.matches[i].match_id == ds.matches[i].match_id);
    CHECK(back.matches[i].date == ds.matches[i].date);
    CHECK(back.matches[i].quote(OddsSource::bet365).win == ds.matches[i].quote(OddsSource::bet365).win);
    CHECK(back.matches[i].wiki_first_w == ds.matches[i].wiki_first_w);
    CHECK(back.matches[i].comment == ds.matches[i].comment);
  }

  SUBCASE("metadata sidecar") {
    std::ifstream meta(path + ".meta.json");
    REQUIRE(meta.good());
    std::stringstream ss;
    ss << meta.rdbuf();
    CHECK(ss.str().find("\"n_matches\": 10") != std::string::npos);
    CHECK(ss.str().find(ds.fingerprint()) != std::string::npos);
  }

  SUBCASE("rewriting the read-back copy is byte-identical") {
    std::string again = (tmp.path / "canonical2.csv").string();
    write_canonical_csv(back, again);
    std::ifstream a(path, std::ios::binary), b(again, std::ios::binary);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
  }
}

TEST_CASE("dataset info json") {
  Dataset ds = mini_dataset();
  std::string info = dataset_info_json(ds);
  CHECK(info.find("\"n_matches\": 10") != std::string::npos);
  CHECK(info.find("\"n_players\": 20") != std::string::npos);
  CHECK(info.find("\"date_min\": \"2018-01-15\"") != std::string::npos);
  CHECK(info.find("\"date_max\": \"2018-02-05\"") != std::string::npos);
}

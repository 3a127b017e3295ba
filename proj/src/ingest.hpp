#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "types.hpp"

namespace buzz {

// Logical field -> column header map. Yearly source files drift, so every
// file declares its own mapping instead of relying on header sniffing.
struct Schema {
  char delimiter = ',';
  DateFormat date_format = DateFormat::day_first;

  std::string date = "Date";
  std::string tournament = "Tournament";
  std::string winner = "Winner";
  std::string loser = "Loser";
  std::string rank_w = "WRank";
  std::string rank_l = "LRank";
  std::string b365_w = "B365W";
  std::string b365_l = "B365L";
  std::string avg_w = "AvgW";
  std::string avg_l = "AvgL";
  std::string max_w = "MaxW";
  std::string max_l = "MaxL";
  std::string wiki_yesterday_w = "wiki_yesterday_w";
  std::string wiki_yesterday_l = "wiki_yesterday_l";
  std::string wiki_med365_w = "wiki_med365_w";
  std::string wiki_med365_l = "wiki_med365_l";
  std::string wiki_first_w = "wiki_first_w";
  std::string wiki_first_l = "wiki_first_l";
  std::string comment = "Comment";

  // Fields allowed to be absent from the header entirely. Everything else
  // missing raises Errc::missing_column, so a typo in a mapping cannot
  // silently blank a load-bearing column.
  std::set<std::string> optional_fields = {"wiki_yesterday_w", "wiki_yesterday_l",
                                           "wiki_med365_w",    "wiki_med365_l",
                                           "wiki_first_w",     "wiki_first_l",
                                           "comment"};

  static Schema from_json(const std::string& text);
  static Schema from_json_file(const std::string& path);
  // Column layout of the canonical dataset file (ISO dates).
  static Schema canonical();
};

// One MatchRecord per data row. Unparseable or nonpositive odds, rank, and
// pageview cells become missing values, never zero. Odds below 1 are kept as
// stored; whether such a number is usable as a quote is decided downstream.
// Dates must parse; a bad date names the offending row.
std::vector<MatchRecord> parse_match_file(const std::string& content, const Schema& schema);
std::vector<MatchRecord> parse_match_path(const std::string& path, const Schema& schema);

struct NormalizeResult {
  Dataset dataset;
  std::vector<std::string> warnings;
};

// Sorts by (date, tournament_key, winner, loser), derives season and
// tournament_key, assigns content-derived match ids, and collapses duplicate
// (date, players, tournament_key) rows to their first occurrence.
NormalizeResult normalize_dataset(std::vector<MatchRecord> records);

// Keeps matches whose completion comment is empty or "Completed".
Dataset filter_completed(const Dataset& ds);

struct RowBuildResult {
  std::vector<PlayerMatchRow> rows;
  std::map<std::string, long> excluded;  // reason -> directed-row count
};

// Two directed rows per match where the inputs allow it. A row needs its own
// implied probability from the modeling odds source plus positive pageview
// inputs for both players; failures are counted per reason, not errors.
RowBuildResult to_player_rows(const Dataset& ds,
                              OddsSource z_source = OddsSource::market_average);

struct SplitResult {
  std::vector<PlayerMatchRow> train;
  std::vector<PlayerMatchRow> test;
};

// train = [train_start, train_end], test = (train_end, test_end].
SplitResult split_samples(const std::vector<PlayerMatchRow>& rows, Date train_end, Date test_end,
                          Date train_start = Date::from_ymd(2016, 1, 1));

// Directed rows with their modeled features, one CSV line per row.
void write_rows_csv(const std::vector<PlayerMatchRow>& rows, const std::string& path);

// Canonical dataset file: fixed column order, ISO dates, shortest
// round-tripping number formatting, plus a JSON metadata sidecar at
// <path>.meta.json. read(write(ds)) reproduces ds exactly.
void write_canonical_csv(const Dataset& ds, const std::string& path);
Dataset read_canonical_csv(const std::string& path);

std::string dataset_info_json(const Dataset& ds);

}  // namespace buzz

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "date.hpp"

namespace buzz {

enum class OddsSource { bet365 = 0, market_average = 1, market_best = 2 };

const char* odds_source_name(OddsSource s);
std::optional<OddsSource> odds_source_from_name(std::string_view name);

// Decimal odds quoted on the eventual winner and loser of one match.
struct OddsPair {
  std::optional<double> win;
  std::optional<double> lose;
  bool complete() const { return win && lose; }
};

// One completed match in result orientation: player_w won.
struct MatchRecord {
  std::string match_id;  // 16 hex chars, derived in normalize_dataset
  Date date;
  int season = 0;
  std::string tournament;
  std::string tournament_key;  // tournament plus season, the cluster unit
  std::string player_w;
  std::string player_l;
  std::optional<int> rank_w;  // nullopt means unranked
  std::optional<int> rank_l;
  std::array<OddsPair, 3> odds;  // indexed by OddsSource
  std::optional<long long> wiki_yesterday_w;
  std::optional<long long> wiki_yesterday_l;
  std::optional<double> wiki_median_w;  // median daily views over the year before
  std::optional<double> wiki_median_l;
  std::optional<Date> wiki_first_w;  // first day pageview data exists
  std::optional<Date> wiki_first_l;
  std::string comment;  // completion status from the source feed

  const OddsPair& quote(OddsSource s) const { return odds[size_t(s)]; }
  OddsPair& quote(OddsSource s) { return odds[size_t(s)]; }
};

struct Dataset {
  std::vector<MatchRecord> matches;
  long duplicates_collapsed = 0;
  std::vector<std::string> source_files;

  long n_matches() const { return long(matches.size()); }
  long n_rows() const { return 2 * long(matches.size()); }
  long n_players() const;
  std::string fingerprint() const;
};

enum class Side { winner = 0, loser = 1 };

inline Side other(Side s) { return s == Side::winner ? Side::loser : Side::winner; }
const char* side_name(Side s);

// Per side, per odds source view used by the betting simulation. k is the
// bookmaker overround of this match at that source, present only when both
// sides were quoted.
struct RowOdds {
  std::optional<double> odds;
  std::optional<double> z;
  std::optional<double> k;
};

// One player-in-match observation. Two of these per match, mirrored.
struct PlayerMatchRow {
  std::string match_id;
  Side side = Side::winner;
  Date date;
  int season = 0;
  std::string tournament_key;
  std::string player;
  std::string opponent;
  int y = 0;  // 1 when this side won
  std::array<RowOdds, 3> odds;
  double z = 0;          // implied probability from the modeling odds source
  double rank_dist = 0;  // inverse rank gap, negative when this side is stronger
  double wikibuzz = 0;   // attention shock difference, this side minus opponent
  double e = 0;          // y - z, the bookmaker forecast error

  const RowOdds& quote(OddsSource s) const { return odds[size_t(s)]; }
  RowOdds& quote(OddsSource s) { return odds[size_t(s)]; }
  std::string row_key() const { return match_id + ":" + side_name(side); }
};

}  // namespace buzz

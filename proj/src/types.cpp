#include "types.hpp"

#include <set>
#include <sstream>

#include "hash.hpp"

namespace buzz {

const char* odds_source_name(OddsSource s) {
  switch (s) {
    case OddsSource::bet365: return "bet365";
    case OddsSource::market_average: return "average";
    case OddsSource::market_best: return "best";
  }
  return "?";
}

std::optional<OddsSource> odds_source_from_name(std::string_view name) {
  if (name == "bet365" || name == "b365") return OddsSource::bet365;
  if (name == "average" || name == "avg") return OddsSource::market_average;
  if (name == "best" || name == "max") return OddsSource::market_best;
  return std::nullopt;
}

const char* side_name(Side s) { return s == Side::winner ? "w" : "l"; }

long Dataset::n_players() const {
  std::set<std::string> names;
  for (const auto& m : matches) {
    names.insert(m.player_w);
    names.insert(m.player_l);
  }
  return long(names.size());
}

std::string Dataset::fingerprint() const {
  std::uint64_t h = fnv1a64("dataset.v1");
  std::ostringstream line;
  for (const auto& m : matches) {
    line.str("");
    line << m.match_id << '|' << m.date.iso() << '|' << m.tournament_key << '|' << m.player_w
         << '|' << m.player_l;
    for (const auto& q : m.odds) {
      line << '|' << (q.win ? std::to_string(*q.win) : "") << '|'
           << (q.lose ? std::to_string(*q.lose) : "");
    }
    line << '|' << (m.wiki_yesterday_w ? std::to_string(*m.wiki_yesterday_w) : "") << '|'
         << (m.wiki_yesterday_l ? std::to_string(*m.wiki_yesterday_l) : "") << '|'
         << (m.wiki_median_w ? std::to_string(*m.wiki_median_w) : "") << '|'
         << (m.wiki_median_l ? std::to_string(*m.wiki_median_l) : "");
    h = fnv1a64(line.str(), h);
    h = fnv1a64("\n", h);
  }
  return hex16(h);
}

}  // namespace buzz

#pragma once

#include <stdexcept>
#include <string>

namespace buzz {

enum class Errc {
  invalid_argument,
  io,
  parse,
  missing_column,
  bad_date,
  bad_odds,
  non_positive_input,
  missing_feature,
  empty_split,
  not_enough_rows,
  rank_deficient,
  single_cluster,
  degenerate_spread,
  unknown_match_id,
  unknown_layout,
  empty_series,
  empty_universe,
  universe_too_small,
  zero_investment,
  profile_not_found,
  transport,
  cache_miss,
  insufficient_history,
  internal,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::io: return "IoError";
    case Errc::parse: return "ParseError";
    case Errc::missing_column: return "MissingColumn";
    case Errc::bad_date: return "BadDate";
    case Errc::bad_odds: return "BadOdds";
    case Errc::non_positive_input: return "NonPositiveInput";
    case Errc::missing_feature: return "MissingFeature";
    case Errc::empty_split: return "EmptySplit";
    case Errc::not_enough_rows: return "NotEnoughRows";
    case Errc::rank_deficient: return "RankDeficient";
    case Errc::single_cluster: return "SingleCluster";
    case Errc::degenerate_spread: return "DegenerateSpread";
    case Errc::unknown_match_id: return "UnknownMatchId";
    case Errc::unknown_layout: return "UnknownLayout";
    case Errc::empty_series: return "EmptySeries";
    case Errc::empty_universe: return "EmptyUniverse";
    case Errc::universe_too_small: return "UniverseTooSmall";
    case Errc::zero_investment: return "ZeroInvestment";
    case Errc::profile_not_found: return "ProfileNotFound";
    case Errc::transport: return "TransportError";
    case Errc::cache_miss: return "CacheMiss";
    case Errc::insufficient_history: return "InsufficientHistory";
    case Errc::internal: return "InternalError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

  Errc code() const { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace buzz

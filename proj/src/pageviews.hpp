#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "date.hpp"
#include "types.hpp"

namespace buzz {

struct PageviewSeries {
  std::string profile_key;
  Date first_available;
  std::map<Date, long long> counts;  // gaps allowed; a missing day means no recorded traffic
};

// On-disk layout: <dir>/manifest.json plus one CSV per (profile, month) at
// <dir>/<profile>/<YYYY-MM>.csv. Writes go through a temp file and rename so
// concurrent readers never observe a half-written month.
class PageviewCache {
public:
  explicit PageviewCache(std::string dir);

  bool has_profile(const std::string& profile) const;
  std::optional<Date> first_available(const std::string& profile) const;
  bool has_month(const std::string& profile, int year, int month) const;
  std::map<Date, long long> read_month(const std::string& profile, int year, int month) const;
  void write_month(const std::string& profile, int year, int month,
                   const std::map<Date, long long>& counts);
  void set_first_available(const std::string& profile, Date d);
  const std::string& dir() const { return dir_; }

private:
  void load_manifest();
  void save_manifest() const;

  std::string dir_;
  struct ProfileEntry {
    std::optional<Date> first_available;
    std::vector<std::string> months;  // "YYYY-MM", sorted
  };
  std::map<std::string, ProfileEntry> profiles_;
};

enum class Transport { fixture, live };

struct FetchOptions {
  Transport transport = Transport::fixture;
  std::string cache_dir;
  // Live endpoint base URL; when empty, taken from BZB_PAGEVIEWS_ENDPOINT.
  // Requests per second default from BZB_PAGEVIEWS_RPS (else 4).
  std::string endpoint;
  double requests_per_second = 0;
  int max_retries = 3;
};

// Daily counts for [start, end]. Fixture mode serves the cache only and
// raises CacheMiss for anything absent; live mode fills cache gaps from the
// endpoint (rate limited, bounded retry with backoff) and then serves the
// merged result. Months already cached are never re-fetched.
PageviewSeries fetch_daily_pageviews(const std::string& profile_key, Date start, Date end,
                                     const FetchOptions& opts);

// yesterday = count on match_date - 1; median over the 366 days
// [match_date - 366, match_date - 1], days without a recorded count as 0,
// even-length median = mean of the central two. Requires the profile to
// predate the window start.
std::pair<long long, double> buzz_inputs(const PageviewSeries& series, Date match_date);

// True iff the profile existed for at least a year and a day before the match.
bool profile_age_ok(const PageviewSeries& series, Date match_date);

// Wikipedia-style article key for a player name: explicit map first, else
// spaces become underscores.
std::string profile_key_for(const std::string& player,
                            const std::map<std::string, std::string>& overrides = {});

// Fills wiki_yesterday/median/first columns for every match from cached
// pageviews. Sides whose profile or history is unavailable stay missing.
// Returns per-outcome counts keyed by reason.
std::map<std::string, long> enrich_dataset(Dataset& ds, const FetchOptions& opts,
                                           const std::map<std::string, std::string>& profile_map = {});

}  // namespace buzz

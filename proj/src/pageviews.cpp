#include "pageviews.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "csv.hpp"
#include "errors.hpp"
#include "http_client.hpp"

namespace buzz {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string month_tag(int year, int month) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
  return buf;
}

std::string sanitize(const std::string& profile) {
  std::string out = profile;
  for (char& c : out)
    if (c == '/' || c == '\\' || c == ':') c = '_';
  return out;
}

const Date kApiFloor = Date::from_ymd(2015, 7, 1);

}  // namespace

PageviewCache::PageviewCache(std::string dir) : dir_(std::move(dir)) {
  if (dir_.empty()) raise(Errc::invalid_argument, "pageview cache needs a directory");
  fs::create_directories(dir_);
  load_manifest();
}

void PageviewCache::load_manifest() {
  std::ifstream in(dir_ + "/manifest.json");
  if (!in) return;
  std::stringstream ss;
  ss << in.rdbuf();
  ordered_json j = ordered_json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) raise(Errc::parse, "corrupt cache manifest in " + dir_);
  // Bound to a named value: iterating items() of a temporary dangles.
  const ordered_json entries = j.value("profiles", ordered_json::object());
  for (const auto& [name, entry] : entries.items()) {
    ProfileEntry p;
    std::string first = entry.value("first_available", "");
    if (!first.empty()) p.first_available = Date::parse(first, DateFormat::iso);
    for (const auto& m : entry.value("months", ordered_json::array()))
      p.months.push_back(m.get<std::string>());
    std::sort(p.months.begin(), p.months.end());
    profiles_[name] = std::move(p);
  }
}

void PageviewCache::save_manifest() const {
  ordered_json j;
  j["kind"] = "pageview_cache_manifest";
  ordered_json profiles = ordered_json::object();
  for (const auto& [name, p] : profiles_) {
    ordered_json e;
    if (p.first_available) e["first_available"] = p.first_available->iso();
    e["months"] = p.months;
    profiles[name] = std::move(e);
  }
  j["profiles"] = std::move(profiles);

  std::string tmp = dir_ + "/manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) raise(Errc::io, "cannot write " + tmp);
    out << j.dump(2) << '\n';
  }
  fs::rename(tmp, dir_ + "/manifest.json");
}

bool PageviewCache::has_profile(const std::string& profile) const {
  return profiles_.count(profile) > 0;
}

std::optional<Date> PageviewCache::first_available(const std::string& profile) const {
  auto it = profiles_.find(profile);
  return it == profiles_.end() ? std::nullopt : it->second.first_available;
}

bool PageviewCache::has_month(const std::string& profile, int year, int month) const {
  auto it = profiles_.find(profile);
  if (it == profiles_.end()) return false;
  const auto& months = it->second.months;
  return std::binary_search(months.begin(), months.end(), month_tag(year, month));
}

std::map<Date, long long> PageviewCache::read_month(const std::string& profile, int year,
                                                    int month) const {
  if (!has_month(profile, year, month))
    raise(Errc::cache_miss, "no cached month " + month_tag(year, month) + " for " + profile);
  std::string path = dir_ + "/" + sanitize(profile) + "/" + month_tag(year, month) + ".csv";
  CsvTable t = read_csv_file(path);
  std::map<Date, long long> out;
  auto date_col = t.column("date"), views_col = t.column("views");
  if (!date_col || !views_col) raise(Errc::parse, "bad cache file " + path);
  for (const auto& row : t.rows) {
    auto v = parse_int_field(row[*views_col]);
    if (!v) raise(Errc::parse, "bad view count in " + path);
    out[Date::parse(row[*date_col], DateFormat::iso)] = *v;
  }
  return out;
}

void PageviewCache::write_month(const std::string& profile, int year, int month,
                                const std::map<Date, long long>& counts) {
  fs::create_directories(dir_ + "/" + sanitize(profile));
  std::string path = dir_ + "/" + sanitize(profile) + "/" + month_tag(year, month) + ".csv";
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) raise(Errc::io, "cannot write " + tmp);
    out << "date,views\n";
    for (const auto& [d, v] : counts) out << d.iso() << ',' << v << '\n';
  }
  fs::rename(tmp, path);

  auto& p = profiles_[profile];
  std::string tag = month_tag(year, month);
  auto it = std::lower_bound(p.months.begin(), p.months.end(), tag);
  if (it == p.months.end() || *it != tag) p.months.insert(it, tag);
  save_manifest();
}

void PageviewCache::set_first_available(const std::string& profile, Date d) {
  profiles_[profile].first_available = d;
  save_manifest();
}

namespace {

struct LiveClient {
  std::string host;  // scheme://host[:port]
  std::string base_path;
  double min_interval_s = 0;
  int max_retries = 3;
  std::chrono::steady_clock::time_point last_request{};

  static LiveClient from_options(const FetchOptions& opts) {
    LiveClient c;
    std::string url = opts.endpoint;
    if (url.empty()) {
      const char* env = std::getenv("BZB_PAGEVIEWS_ENDPOINT");
      if (env) url = env;
    }
    if (url.empty())
      raise(Errc::invalid_argument,
            "live fetches need an endpoint (option or BZB_PAGEVIEWS_ENDPOINT)");
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) raise(Errc::invalid_argument, "endpoint needs a scheme");
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
      c.host = url;
    } else {
      c.host = url.substr(0, path_start);
      c.base_path = url.substr(path_start);
    }
    while (!c.base_path.empty() && c.base_path.back() == '/') c.base_path.pop_back();

    double rps = opts.requests_per_second;
    if (rps <= 0) {
      const char* env = std::getenv("BZB_PAGEVIEWS_RPS");
      rps = env ? std::atof(env) : 0;
      if (rps <= 0) rps = 4.0;
    }
    c.min_interval_s = 1.0 / rps;
    c.max_retries = opts.max_retries;
    return c;
  }

  void throttle() {
    auto now = std::chrono::steady_clock::now();
    if (last_request.time_since_epoch().count() != 0) {
      auto elapsed = std::chrono::duration<double>(now - last_request).count();
      if (elapsed < min_interval_s)
        std::this_thread::sleep_for(std::chrono::duration<double>(min_interval_s - elapsed));
    }
    last_request = std::chrono::steady_clock::now();
  }

  // One month of daily counts. 404 means the profile (or range) is unknown
  // to the endpoint; throttled and server-side failures are retried with
  // exponential backoff before giving up.
  std::map<Date, long long> fetch_month(const std::string& profile, int year, int month) {
    char range[40];
    Date lo = Date::from_ymd(year, month, 1);
    Date hi = month_end(lo);
    std::snprintf(range, sizeof(range), "/%04d%02d%02d00/%04d%02d%02d00", lo.year(), lo.month(),
                  lo.day(), hi.year(), hi.month(), hi.day());
    std::string path = base_path + "/" + profile + "/daily" + range;

    httplib::Client client(host);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);

    for (int attempt = 0;; ++attempt) {
      throttle();
      auto res = client.Get(path);
      if (res && res->status == 200) {
        ordered_json j = ordered_json::parse(res->body, nullptr, false);
        if (j.is_discarded()) raise(Errc::transport, "malformed response for " + path);
        std::map<Date, long long> out;
        for (const auto& item : j.value("items", ordered_json::array())) {
          std::string ts = item.value("timestamp", "");
          if (ts.size() < 8) continue;
          Date d = Date::from_ymd(std::stoi(ts.substr(0, 4)), std::stoi(ts.substr(4, 2)),
                                  std::stoi(ts.substr(6, 2)));
          out[d] = item.value("views", 0LL);
        }
        return out;
      }
      if (res && res->status == 404)
        raise(Errc::profile_not_found, "endpoint has no data for profile " + profile);
      bool retryable = !res || res->status == 429 || res->status >= 500;
      if (!retryable || attempt >= max_retries) {
        std::string what = res ? "status " + std::to_string(res->status)
                               : "connection failure";
        raise(Errc::transport, "fetch failed for " + path + " (" + what + ")");
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(200 << attempt));
    }
  }
};

}  // namespace

PageviewSeries fetch_daily_pageviews(const std::string& profile_key, Date start, Date end,
                                     const FetchOptions& opts) {
  if (start > end) raise(Errc::invalid_argument, "pageview range start is after end");
  if (opts.cache_dir.empty())
    raise(Errc::invalid_argument, "pageview fetches need a cache directory");
  PageviewCache cache(opts.cache_dir);

  std::vector<std::pair<int, int>> months;
  for (Date d = month_begin(start); d <= end; d = month_end(d) + 1)
    months.emplace_back(d.year(), d.month());

  if (opts.transport == Transport::fixture) {
    if (!cache.has_profile(profile_key))
      raise(Errc::cache_miss, "profile " + profile_key + " not in fixture cache");
    for (auto [y, m] : months)
      if (!cache.has_month(profile_key, y, m))
        raise(Errc::cache_miss,
              "month " + month_tag(y, m) + " for " + profile_key + " not in fixture cache");
  } else {
    LiveClient client = LiveClient::from_options(opts);
    for (auto [y, m] : months)
      if (!cache.has_month(profile_key, y, m))
        cache.write_month(profile_key, y, m, client.fetch_month(profile_key, y, m));
  }

  PageviewSeries series;
  series.profile_key = profile_key;
  for (auto [y, m] : months)
    for (const auto& [d, v] : cache.read_month(profile_key, y, m))
      if (d >= start && d <= end) series.counts[d] = v;

  auto first = cache.first_available(profile_key);
  if (!first) {
    // The manifest learns the profile birth from the earliest day that has
    // data. Accurate when fetches begin at the API availability floor.
    if (!series.counts.empty()) {
      first = series.counts.begin()->first;
      if (*first < kApiFloor) first = kApiFloor;
      cache.set_first_available(profile_key, *first);
    } else {
      raise(Errc::cache_miss, "no data and no recorded first day for " + profile_key);
    }
  }
  series.first_available = *first;
  while (!series.counts.empty() && series.counts.begin()->first < series.first_available)
    series.counts.erase(series.counts.begin());
  return series;
}

std::pair<long long, double> buzz_inputs(const PageviewSeries& series, Date match_date) {
  const Date window_lo = match_date - 366;
  const Date window_hi = match_date - 1;
  if (series.first_available > window_lo)
    raise(Errc::insufficient_history, series.profile_key + " first day " +
                                          series.first_available.iso() + " is after " +
                                          window_lo.iso());

  std::vector<long long> values;
  values.reserve(366);
  for (Date d = window_lo; d <= window_hi; d = d + 1) {
    auto it = series.counts.find(d);
    values.push_back(it == series.counts.end() ? 0 : it->second);
  }
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  double median = (double(values[n / 2 - 1]) + double(values[n / 2])) / 2.0;

  auto it = series.counts.find(window_hi);
  long long yesterday = it == series.counts.end() ? 0 : it->second;
  return {yesterday, median};
}

bool profile_age_ok(const PageviewSeries& series, Date match_date) {
  return match_date - series.first_available >= 366;
}

std::string profile_key_for(const std::string& player,
                            const std::map<std::string, std::string>& overrides) {
  auto it = overrides.find(player);
  if (it != overrides.end()) return it->second;
  std::string key = player;
  std::replace(key.begin(), key.end(), ' ', '_');
  return key;
}

std::map<std::string, long> enrich_dataset(Dataset& ds, const FetchOptions& opts,
                                           const std::map<std::string, std::string>& profile_map) {
  std::map<std::string, long> stats;
  if (ds.matches.empty()) return stats;

  std::map<std::string, Date> latest;  // player -> last match date
  for (const auto& m : ds.matches)
    for (const auto* p : {&m.player_w, &m.player_l}) {
      auto [it, fresh] = latest.emplace(*p, m.date);
      if (!fresh && m.date > it->second) it->second = m.date;
    }

  std::map<std::string, PageviewSeries> series;
  for (const auto& [player, last] : latest) {
    std::string key = profile_key_for(player, profile_map);
    try {
      series[player] = fetch_daily_pageviews(key, kApiFloor, last - 1, opts);
      ++stats["profiles_fetched"];
    } catch (const Error&) {
      ++stats["profiles_unavailable"];
    }
  }

  for (auto& m : ds.matches) {
    for (Side side : {Side::winner, Side::loser}) {
      const bool is_w = side == Side::winner;
      auto it = series.find(is_w ? m.player_w : m.player_l);
      if (it == series.end()) {
        ++stats["sides_no_profile"];
        continue;
      }
      const PageviewSeries& s = it->second;
      auto& first = is_w ? m.wiki_first_w : m.wiki_first_l;
      first = s.first_available;
      if (!profile_age_ok(s, m.date)) {
        ++stats["sides_young_profile"];
        continue;
      }
      auto [yesterday, median] = buzz_inputs(s, m.date);
      (is_w ? m.wiki_yesterday_w : m.wiki_yesterday_l) = yesterday;
      (is_w ? m.wiki_median_w : m.wiki_median_l) = median;
      ++stats["sides_enriched"];
    }
  }
  return stats;
}

}  // namespace buzz

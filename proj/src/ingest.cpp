#include "ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "csv.hpp"
#include "errors.hpp"
#include "features.hpp"
#include "hash.hpp"

namespace buzz {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string trim_copy(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

std::string opt_str(const std::optional<double>& v) { return v ? format_double(*v) : ""; }
std::string opt_str(const std::optional<long long>& v) { return v ? std::to_string(*v) : ""; }
std::string opt_str(const std::optional<int>& v) { return v ? std::to_string(*v) : ""; }
std::string opt_str(const std::optional<Date>& v) { return v ? v->iso() : ""; }

struct FieldRef {
  const char* logical;
  std::string Schema::*member;
};

constexpr auto schema_fields = std::to_array<FieldRef>({
    {"date", &Schema::date},
    {"tournament", &Schema::tournament},
    {"winner", &Schema::winner},
    {"loser", &Schema::loser},
    {"rank_w", &Schema::rank_w},
    {"rank_l", &Schema::rank_l},
    {"b365_w", &Schema::b365_w},
    {"b365_l", &Schema::b365_l},
    {"avg_w", &Schema::avg_w},
    {"avg_l", &Schema::avg_l},
    {"max_w", &Schema::max_w},
    {"max_l", &Schema::max_l},
    {"wiki_yesterday_w", &Schema::wiki_yesterday_w},
    {"wiki_yesterday_l", &Schema::wiki_yesterday_l},
    {"wiki_med365_w", &Schema::wiki_med365_w},
    {"wiki_med365_l", &Schema::wiki_med365_l},
    {"wiki_first_w", &Schema::wiki_first_w},
    {"wiki_first_l", &Schema::wiki_first_l},
    {"comment", &Schema::comment},
});

}  // namespace

Schema Schema::from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) raise(Errc::parse, "schema is not valid JSON");
  Schema s;
  std::string delim = j.value("delimiter", ",");
  if (delim.size() != 1) raise(Errc::parse, "schema delimiter must be one character");
  s.delimiter = delim[0];
  std::string df = j.value("date_format", "day_first");
  if (df == "day_first")
    s.date_format = DateFormat::day_first;
  else if (df == "month_first")
    s.date_format = DateFormat::month_first;
  else if (df == "iso")
    s.date_format = DateFormat::iso;
  else
    raise(Errc::parse, "unknown date_format '" + df + "'");
  if (j.contains("columns")) {
    for (const auto& [key, value] : j["columns"].items()) {
      bool known = false;
      for (const auto& f : schema_fields)
        if (key == f.logical) {
          s.*(f.member) = value.get<std::string>();
          known = true;
          break;
        }
      if (!known) raise(Errc::parse, "schema maps unknown logical field '" + key + "'");
    }
  }
  if (j.contains("optional")) {
    s.optional_fields.clear();
    for (const auto& v : j["optional"]) s.optional_fields.insert(v.get<std::string>());
  }
  return s;
}

Schema Schema::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io, "cannot open schema file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

Schema Schema::canonical() {
  Schema s;
  s.date_format = DateFormat::iso;
  s.date = "date";
  s.tournament = "tournament";
  s.winner = "winner";
  s.loser = "loser";
  s.rank_w = "rank_w";
  s.rank_l = "rank_l";
  s.b365_w = "b365_w";
  s.b365_l = "b365_l";
  s.avg_w = "avg_w";
  s.avg_l = "avg_l";
  s.max_w = "max_w";
  s.max_l = "max_l";
  s.comment = "comment";
  return s;
}

std::vector<MatchRecord> parse_match_file(const std::string& content, const Schema& schema) {
  std::istringstream in(content);
  CsvTable table = read_csv(in, schema.delimiter);
  if (table.header.empty()) return {};

  std::map<std::string, std::optional<size_t>> col;
  for (const auto& f : schema_fields) {
    const std::string& name = schema.*(f.member);
    auto idx = table.column(name);
    if (!idx && !schema.optional_fields.count(f.logical))
      raise(Errc::missing_column, "column '" + name + "' (field " + f.logical + ") not in header");
    col[f.logical] = idx;
  }

  auto cell = [&](const std::vector<std::string>& row, const char* logical) -> std::string_view {
    const auto& idx = col.at(logical);
    if (!idx) return {};
    return row[*idx];
  };
  auto odds_cell = [&](const std::vector<std::string>& row, const char* logical) {
    // Values below 1 are kept as stored: presence/absence is what the
    // cleaning audit counts, validity as a quote is decided where the
    // number is used.
    std::optional<double> v = parse_double_field(cell(row, logical));
    if (v && *v <= 0.0) v.reset();
    return v;
  };
  auto rank_cell = [&](const std::vector<std::string>& row, const char* logical) {
    std::optional<long long> v = parse_int_field(cell(row, logical));
    if (v && *v <= 0) v.reset();
    return v ? std::optional<int>(int(*v)) : std::nullopt;
  };

  std::vector<MatchRecord> records;
  records.reserve(table.rows.size());
  for (size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    MatchRecord m;
    auto date_text = cell(row, "date");
    auto date = Date::try_parse(date_text, schema.date_format);
    if (!date)
      raise(Errc::bad_date, "row " + std::to_string(i + 2) + ": cannot parse date '" +
                                std::string(date_text) + "'");
    m.date = *date;
    m.tournament = trim_copy(cell(row, "tournament"));
    m.player_w = trim_copy(cell(row, "winner"));
    m.player_l = trim_copy(cell(row, "loser"));
    m.rank_w = rank_cell(row, "rank_w");
    m.rank_l = rank_cell(row, "rank_l");
    m.quote(OddsSource::bet365) = {odds_cell(row, "b365_w"), odds_cell(row, "b365_l")};
    m.quote(OddsSource::market_average) = {odds_cell(row, "avg_w"), odds_cell(row, "avg_l")};
    m.quote(OddsSource::market_best) = {odds_cell(row, "max_w"), odds_cell(row, "max_l")};
    m.wiki_yesterday_w = parse_int_field(cell(row, "wiki_yesterday_w"));
    m.wiki_yesterday_l = parse_int_field(cell(row, "wiki_yesterday_l"));
    if (m.wiki_yesterday_w && *m.wiki_yesterday_w < 0) m.wiki_yesterday_w.reset();
    if (m.wiki_yesterday_l && *m.wiki_yesterday_l < 0) m.wiki_yesterday_l.reset();
    m.wiki_median_w = parse_double_field(cell(row, "wiki_med365_w"));
    m.wiki_median_l = parse_double_field(cell(row, "wiki_med365_l"));
    if (m.wiki_median_w && *m.wiki_median_w < 0) m.wiki_median_w.reset();
    if (m.wiki_median_l && *m.wiki_median_l < 0) m.wiki_median_l.reset();
    m.wiki_first_w = Date::try_parse(cell(row, "wiki_first_w"), DateFormat::iso);
    m.wiki_first_l = Date::try_parse(cell(row, "wiki_first_l"), DateFormat::iso);
    m.comment = trim_copy(cell(row, "comment"));
    records.push_back(std::move(m));
  }
  return records;
}

std::vector<MatchRecord> parse_match_path(const std::string& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_match_file(ss.str(), schema);
}

NormalizeResult normalize_dataset(std::vector<MatchRecord> records) {
  NormalizeResult out;
  const Date lo = Date::from_ymd(2015, 7, 1), hi = Date::from_ymd(2023, 8, 31);
  long out_of_bounds = 0;
  for (auto& m : records) {
    m.season = m.date.year();
    m.tournament_key = m.tournament + " " + std::to_string(m.season);
    m.match_id = hex16(fnv1a64(m.date.iso() + "|" + m.player_w + "|" + m.player_l + "|" +
                               m.tournament_key));
    if (m.date < lo || m.date > hi) ++out_of_bounds;
  }
  if (out_of_bounds)
    out.warnings.push_back(std::to_string(out_of_bounds) +
                           " match(es) outside the expected 2015-07-01..2023-08-31 window");

  std::stable_sort(records.begin(), records.end(), [](const MatchRecord& a, const MatchRecord& b) {
    return std::tie(a.date, a.tournament_key, a.player_w, a.player_l) <
           std::tie(b.date, b.tournament_key, b.player_w, b.player_l);
  });

  std::set<std::string> seen;
  for (auto& m : records) {
    if (seen.insert(m.match_id).second)
      out.dataset.matches.push_back(std::move(m));
    else
      ++out.dataset.duplicates_collapsed;
  }
  if (out.dataset.duplicates_collapsed)
    out.warnings.push_back(std::to_string(out.dataset.duplicates_collapsed) +
                           " duplicate row(s) collapsed");
  return out;
}

Dataset filter_completed(const Dataset& ds) {
  Dataset out;
  out.duplicates_collapsed = ds.duplicates_collapsed;
  out.source_files = ds.source_files;
  for (const auto& m : ds.matches)
    if (m.comment.empty() || m.comment == "Completed") out.matches.push_back(m);
  return out;
}

RowBuildResult to_player_rows(const Dataset& ds, OddsSource z_source) {
  RowBuildResult out;
  out.rows.reserve(ds.matches.size() * 2);

  for (const auto& m : ds.matches) {
    const bool wiki_present = m.wiki_yesterday_w && m.wiki_yesterday_l && m.wiki_median_w &&
                              m.wiki_median_l;
    const bool wiki_positive = wiki_present && *m.wiki_yesterday_w > 0 && *m.wiki_yesterday_l > 0 &&
                               *m.wiki_median_w > 0 && *m.wiki_median_l > 0;

    for (Side side : {Side::winner, Side::loser}) {
      const bool is_w = side == Side::winner;
      const auto& own_z_odds = is_w ? m.quote(z_source).win : m.quote(z_source).lose;
      if (!own_z_odds) {
        ++out.excluded["missing_model_odds"];
        continue;
      }
      if (*own_z_odds < 1.0) {
        ++out.excluded["invalid_model_odds"];
        continue;
      }
      if (!wiki_present) {
        ++out.excluded["missing_attention"];
        continue;
      }
      if (!wiki_positive) {
        ++out.excluded["nonpositive_attention"];
        continue;
      }

      PlayerMatchRow r;
      r.match_id = m.match_id;
      r.side = side;
      r.date = m.date;
      r.season = m.season;
      r.tournament_key = m.tournament_key;
      r.player = is_w ? m.player_w : m.player_l;
      r.opponent = is_w ? m.player_l : m.player_w;
      r.y = is_w ? 1 : 0;

      for (OddsSource src :
           {OddsSource::bet365, OddsSource::market_average, OddsSource::market_best}) {
        const auto& q = m.quote(src);
        RowOdds ro;
        ro.odds = is_w ? q.win : q.lose;
        // A stored value below 1 stays visible as the quote but yields no
        // probability, so it can never be bet on or priced.
        if (ro.odds && *ro.odds >= 1.0) ro.z = implied_probability(*ro.odds);
        if (q.complete() && *q.win >= 1.0 && *q.lose >= 1.0)
          ro.k = overround(implied_probability(*q.win), implied_probability(*q.lose));
        r.quote(src) = ro;
      }

      r.z = *r.quote(z_source).z;
      r.rank_dist = is_w ? rank_distance(m.rank_w, m.rank_l) : rank_distance(m.rank_l, m.rank_w);
      double w_own = double(is_w ? *m.wiki_yesterday_w : *m.wiki_yesterday_l);
      double w_opp = double(is_w ? *m.wiki_yesterday_l : *m.wiki_yesterday_w);
      double med_own = is_w ? *m.wiki_median_w : *m.wiki_median_l;
      double med_opp = is_w ? *m.wiki_median_l : *m.wiki_median_w;
      r.wikibuzz = wikibuzz(w_own, med_own, w_opp, med_opp);
      r.e = forecast_error(r.y, r.z);
      out.rows.push_back(std::move(r));
    }
  }
  return out;
}

SplitResult split_samples(const std::vector<PlayerMatchRow>& rows, Date train_end, Date test_end,
                          Date train_start) {
  if (!(train_start <= train_end && train_end < test_end))
    raise(Errc::invalid_argument, "need train_start <= train_end < test_end");
  SplitResult out;
  for (const auto& r : rows) {
    if (r.date >= train_start && r.date <= train_end)
      out.train.push_back(r);
    else if (r.date > train_end && r.date <= test_end)
      out.test.push_back(r);
  }
  if (out.train.empty()) raise(Errc::empty_split, "no rows in the training window");
  if (out.test.empty()) raise(Errc::empty_split, "no rows in the test window");
  return out;
}

void write_canonical_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io, "cannot write " + path);
  static const std::vector<std::string> header = {
      "match_id",  "date",   "season", "tournament",       "tournament_key",
      "winner",    "loser",  "rank_w", "rank_l",           "b365_w",
      "b365_l",    "avg_w",  "avg_l",  "max_w",            "max_l",
      "wiki_yesterday_w",    "wiki_yesterday_l",           "wiki_med365_w",
      "wiki_med365_l",       "wiki_first_w",               "wiki_first_l",
      "comment"};
  write_csv_row(out, header);
  for (const auto& m : ds.matches) {
    const auto& b = m.quote(OddsSource::bet365);
    const auto& a = m.quote(OddsSource::market_average);
    const auto& x = m.quote(OddsSource::market_best);
    write_csv_row(out, {m.match_id, m.date.iso(), std::to_string(m.season), m.tournament,
                        m.tournament_key, m.player_w, m.player_l, opt_str(m.rank_w),
                        opt_str(m.rank_l), opt_str(b.win), opt_str(b.lose), opt_str(a.win),
                        opt_str(a.lose), opt_str(x.win), opt_str(x.lose),
                        opt_str(m.wiki_yesterday_w), opt_str(m.wiki_yesterday_l),
                        opt_str(m.wiki_median_w), opt_str(m.wiki_median_l),
                        opt_str(m.wiki_first_w), opt_str(m.wiki_first_l), m.comment});
  }
  out.close();
  if (!out) raise(Errc::io, "short write to " + path);

  std::ofstream meta(path + ".meta.json", std::ios::binary);
  if (!meta) raise(Errc::io, "cannot write " + path + ".meta.json");
  meta << dataset_info_json(ds) << '\n';
}

void write_rows_csv(const std::vector<PlayerMatchRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io, "cannot write " + path);
  write_csv_row(out, {"match_id", "side",      "date",    "season",   "tournament_key",
                      "player",   "opponent",  "y",       "z",        "rank_dist",
                      "wikibuzz", "e",         "b365",    "avg",      "max"});
  for (const auto& r : rows) {
    auto odds_str = [&](OddsSource src) {
      const auto& q = r.quote(src);
      return q.odds ? format_double(*q.odds) : std::string();
    };
    write_csv_row(out, {r.match_id, side_name(r.side), r.date.iso(), std::to_string(r.season),
                        r.tournament_key, r.player, r.opponent, std::to_string(r.y),
                        format_double(r.z), format_double(r.rank_dist), format_double(r.wikibuzz),
                        format_double(r.e), odds_str(OddsSource::bet365),
                        odds_str(OddsSource::market_average), odds_str(OddsSource::market_best)});
  }
  out.close();
  if (!out) raise(Errc::io, "short write to " + path);
}

Dataset read_canonical_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto records = parse_match_file(ss.str(), Schema::canonical());
  NormalizeResult norm = normalize_dataset(std::move(records));
  norm.dataset.source_files = {path};
  return std::move(norm.dataset);
}

std::string dataset_info_json(const Dataset& ds) {
  ordered_json j;
  j["kind"] = "dataset_meta";
  j["n_matches"] = ds.n_matches();
  j["n_rows"] = ds.n_rows();
  j["n_players"] = ds.n_players();
  j["duplicates_collapsed"] = ds.duplicates_collapsed;
  j["fingerprint"] = ds.fingerprint();
  if (!ds.matches.empty()) {
    j["date_min"] = ds.matches.front().date.iso();
    j["date_max"] = ds.matches.back().date.iso();
  }
  j["source_files"] = ds.source_files;
  return j.dump(2);
}

}  // namespace buzz

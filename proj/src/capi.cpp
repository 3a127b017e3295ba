#include "buzzback.h"

#include <cstdlib>
#include <cstring>
#include <json.hpp>
#include <string>

#include "backtest.hpp"
#include "clean.hpp"
#include "errors.hpp"
#include "estimate.hpp"
#include "ingest.hpp"
#include "pageviews.hpp"
#include "report.hpp"
#include "significance.hpp"
#include "types.hpp"

using nlohmann::ordered_json;

struct bzb_dataset {
  buzz::Dataset ds;
};
struct bzb_rows {
  std::vector<buzz::PlayerMatchRow> rows;
};
struct bzb_fit {
  buzz::RegressionFit fit;
};
struct bzb_ledger {
  buzz::BetLedger ledger;
};

namespace {

thread_local std::string g_last_error;

bzb_status status_of(buzz::Errc c) {
  using buzz::Errc;
  switch (c) {
    case Errc::invalid_argument: return BZB_ERR_INVALID_ARGUMENT;
    case Errc::io: return BZB_ERR_IO;
    case Errc::parse: return BZB_ERR_PARSE;
    case Errc::missing_column: return BZB_ERR_MISSING_COLUMN;
    case Errc::bad_date: return BZB_ERR_BAD_DATE;
    case Errc::bad_odds: return BZB_ERR_BAD_ODDS;
    case Errc::non_positive_input: return BZB_ERR_NON_POSITIVE_INPUT;
    case Errc::missing_feature: return BZB_ERR_MISSING_FEATURE;
    case Errc::empty_split: return BZB_ERR_EMPTY_SPLIT;
    case Errc::not_enough_rows: return BZB_ERR_NOT_ENOUGH_ROWS;
    case Errc::rank_deficient: return BZB_ERR_RANK_DEFICIENT;
    case Errc::single_cluster: return BZB_ERR_SINGLE_CLUSTER;
    case Errc::degenerate_spread: return BZB_ERR_DEGENERATE_SPREAD;
    case Errc::unknown_match_id: return BZB_ERR_UNKNOWN_MATCH_ID;
    case Errc::unknown_layout: return BZB_ERR_UNKNOWN_LAYOUT;
    case Errc::empty_series: return BZB_ERR_EMPTY_SERIES;
    case Errc::empty_universe: return BZB_ERR_EMPTY_UNIVERSE;
    case Errc::universe_too_small: return BZB_ERR_UNIVERSE_TOO_SMALL;
    case Errc::zero_investment: return BZB_ERR_ZERO_INVESTMENT;
    case Errc::profile_not_found: return BZB_ERR_PROFILE_NOT_FOUND;
    case Errc::transport: return BZB_ERR_TRANSPORT;
    case Errc::cache_miss: return BZB_ERR_CACHE_MISS;
    case Errc::insufficient_history: return BZB_ERR_INSUFFICIENT_HISTORY;
    case Errc::internal: return BZB_ERR_INTERNAL;
  }
  return BZB_ERR_INTERNAL;
}

template <typename Fn>
bzb_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return BZB_OK;
  } catch (const buzz::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BZB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return BZB_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (!p) buzz::raise(buzz::Errc::invalid_argument, std::string(what) + " must not be null");
}

std::string text_or(const char* s, const char* fallback) { return s && *s ? s : fallback; }

ordered_json parse_options(const char* json, const char* what) {
  if (!json || !*json) return ordered_json::object();
  try {
    return ordered_json::parse(json);
  } catch (const std::exception& e) {
    buzz::raise(buzz::Errc::parse, std::string("bad ") + what + ": " + e.what());
  }
}

buzz::Date parse_iso(const char* s, const char* what) {
  require(s, what);
  auto d = buzz::Date::try_parse(s, buzz::DateFormat::iso);
  if (!d) buzz::raise(buzz::Errc::bad_date, std::string(what) + ": cannot parse '" + s + "'");
  return *d;
}

buzz::FetchOptions fetch_options_from(const ordered_json& j) {
  buzz::FetchOptions opts;
  std::string transport = j.value("transport", "fixture");
  if (transport == "fixture") opts.transport = buzz::Transport::fixture;
  else if (transport == "live") opts.transport = buzz::Transport::live;
  else buzz::raise(buzz::Errc::invalid_argument, "transport must be 'fixture' or 'live'");
  opts.cache_dir = j.value("cache_dir", "");
  opts.endpoint = j.value("endpoint", "");
  opts.requests_per_second = j.value("requests_per_second", 0.0);
  opts.max_retries = j.value("max_retries", 3);
  return opts;
}

}  // namespace

extern "C" {

const char* bzb_version(void) { return buzz::kToolVersion; }

const char* bzb_status_name(bzb_status s) {
  switch (s) {
    case BZB_OK: return "ok";
    case BZB_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case BZB_ERR_IO: return "Io";
    case BZB_ERR_PARSE: return "Parse";
    case BZB_ERR_MISSING_COLUMN: return "MissingColumn";
    case BZB_ERR_BAD_DATE: return "BadDate";
    case BZB_ERR_BAD_ODDS: return "BadOdds";
    case BZB_ERR_NON_POSITIVE_INPUT: return "NonPositiveInput";
    case BZB_ERR_MISSING_FEATURE: return "MissingFeature";
    case BZB_ERR_EMPTY_SPLIT: return "EmptySplit";
    case BZB_ERR_NOT_ENOUGH_ROWS: return "NotEnoughRows";
    case BZB_ERR_RANK_DEFICIENT: return "RankDeficient";
    case BZB_ERR_SINGLE_CLUSTER: return "SingleCluster";
    case BZB_ERR_DEGENERATE_SPREAD: return "DegenerateSpread";
    case BZB_ERR_UNKNOWN_MATCH_ID: return "UnknownMatchId";
    case BZB_ERR_UNKNOWN_LAYOUT: return "UnknownLayout";
    case BZB_ERR_EMPTY_SERIES: return "EmptySeries";
    case BZB_ERR_EMPTY_UNIVERSE: return "EmptyUniverse";
    case BZB_ERR_UNIVERSE_TOO_SMALL: return "UniverseTooSmall";
    case BZB_ERR_ZERO_INVESTMENT: return "ZeroInvestment";
    case BZB_ERR_PROFILE_NOT_FOUND: return "ProfileNotFound";
    case BZB_ERR_TRANSPORT: return "Transport";
    case BZB_ERR_CACHE_MISS: return "CacheMiss";
    case BZB_ERR_INSUFFICIENT_HISTORY: return "InsufficientHistory";
    case BZB_ERR_INTERNAL: return "Internal";
  }
  return "Internal";
}

const char* bzb_last_error(void) { return g_last_error.c_str(); }

void bzb_string_free(char* s) { std::free(s); }

/* dataset ------------------------------------------------------------- */

bzb_status bzb_dataset_ingest(const char* csv_path, const char* schema_json, bzb_dataset** out) {
  return guarded([&] {
    require(csv_path, "csv_path");
    require(out, "out");
    buzz::Schema schema;
    if (schema_json && *schema_json) schema = buzz::Schema::from_json(schema_json);
    auto records = buzz::parse_match_path(csv_path, schema);
    auto normalized = buzz::normalize_dataset(std::move(records));
    normalized.dataset.source_files = {csv_path};
    *out = new bzb_dataset{std::move(normalized.dataset)};
  });
}

bzb_status bzb_dataset_read_canonical(const char* csv_path, bzb_dataset** out) {
  return guarded([&] {
    require(csv_path, "csv_path");
    require(out, "out");
    *out = new bzb_dataset{buzz::read_canonical_csv(csv_path)};
  });
}

bzb_status bzb_dataset_write_canonical(const bzb_dataset* ds, const char* csv_path) {
  return guarded([&] {
    require(ds, "ds");
    require(csv_path, "csv_path");
    buzz::write_canonical_csv(ds->ds, csv_path);
  });
}

bzb_status bzb_dataset_info(const bzb_dataset* ds, char** out_json) {
  return guarded([&] {
    require(ds, "ds");
    require(out_json, "out_json");
    *out_json = dup_string(buzz::dataset_info_json(ds->ds));
  });
}

bzb_status bzb_dataset_clean(const bzb_dataset* ds, const char* options_json,
                             bzb_dataset** out_clean, char** out_report_json) {
  return guarded([&] {
    require(ds, "ds");
    require(out_clean, "out_clean");
    ordered_json j = parse_options(options_json, "clean options");
    buzz::CleanOptions opts;
    if (j.contains("sigma") && !j["sigma"].is_null()) opts.sigma = j["sigma"].get<double>();
    for (const auto& s : j.value("skip_steps", std::vector<int>{})) opts.skip_steps.insert(s);
    auto result = buzz::run_pipeline(ds->ds, opts);
    if (out_report_json) *out_report_json = dup_string(result.report.to_json());
    *out_clean = new bzb_dataset{std::move(result.dataset)};
  });
}

bzb_status bzb_dataset_anomalies(const bzb_dataset* ds, const char* options_json, char** out_json) {
  return guarded([&] {
    require(ds, "ds");
    require(out_json, "out_json");
    ordered_json j = parse_options(options_json, "anomaly options");
    std::optional<double> sigma;
    if (j.contains("sigma") && !j["sigma"].is_null()) sigma = j["sigma"].get<double>();
    auto flags = buzz::scan_anomalies(ds->ds, sigma);
    ordered_json arr = ordered_json::array();
    for (const auto& f : flags) {
      ordered_json e;
      e["row_key"] = f.row_key;
      e["kind"] = f.kind;
      e["detail"] = f.detail;
      arr.push_back(std::move(e));
    }
    ordered_json root;
    root["kind"] = "anomaly_scan";
    root["flags"] = std::move(arr);
    *out_json = dup_string(root.dump(2));
  });
}

bzb_status bzb_dataset_exclude(const bzb_dataset* ds, const char* const* match_ids, size_t n_ids,
                               bzb_dataset** out) {
  return guarded([&] {
    require(ds, "ds");
    require(out, "out");
    if (n_ids > 0) require(match_ids, "match_ids");
    std::vector<std::string> ids;
    ids.reserve(n_ids);
    for (size_t i = 0; i < n_ids; ++i) {
      require(match_ids[i], "match_ids[i]");
      ids.emplace_back(match_ids[i]);
    }
    *out = new bzb_dataset{buzz::exclude_rows(ds->ds, ids)};
  });
}

bzb_status bzb_dataset_enrich(const bzb_dataset* ds, const char* options_json, bzb_dataset** out,
                              char** out_stats_json) {
  return guarded([&] {
    require(ds, "ds");
    require(out, "out");
    ordered_json j = parse_options(options_json, "enrich options");
    buzz::FetchOptions opts = fetch_options_from(j);
    std::map<std::string, std::string> profile_map;
    if (j.contains("profiles")) profile_map = j["profiles"].get<std::map<std::string, std::string>>();
    buzz::Dataset copy = ds->ds;
    auto stats = buzz::enrich_dataset(copy, opts, profile_map);
    if (out_stats_json) {
      ordered_json s;
      for (const auto& [k, v] : stats) s[k] = v;
      *out_stats_json = dup_string(s.dump(2));
    }
    *out = new bzb_dataset{std::move(copy)};
  });
}

void bzb_dataset_free(bzb_dataset* ds) { delete ds; }

/* rows ---------------------------------------------------------------- */

bzb_status bzb_rows_build(const bzb_dataset* ds, const char* odds_source, int completed_only,
                          bzb_rows** out, char** out_exclusions_json) {
  return guarded([&] {
    require(ds, "ds");
    require(out, "out");
    auto source = buzz::odds_source_from_name(text_or(odds_source, "average"));
    if (!source)
      buzz::raise(buzz::Errc::invalid_argument,
                  "odds_source must be 'bet365', 'average' or 'best'");
    const buzz::Dataset* base = &ds->ds;
    buzz::Dataset completed;
    if (completed_only) {
      completed = buzz::filter_completed(ds->ds);
      base = &completed;
    }
    auto built = buzz::to_player_rows(*base, *source);
    if (out_exclusions_json) {
      ordered_json e;
      for (const auto& [k, v] : built.excluded) e[k] = v;
      *out_exclusions_json = dup_string(e.dump(2));
    }
    *out = new bzb_rows{std::move(built.rows)};
  });
}

bzb_status bzb_rows_split(const bzb_rows* rows, const char* train_start, const char* train_end,
                          const char* test_end, bzb_rows** out_train, bzb_rows** out_test) {
  return guarded([&] {
    require(rows, "rows");
    require(out_train, "out_train");
    require(out_test, "out_test");
    buzz::Date start = train_start && *train_start ? parse_iso(train_start, "train_start")
                                                   : buzz::Date::from_ymd(2016, 1, 1);
    auto split = buzz::split_samples(rows->rows, parse_iso(train_end, "train_end"),
                                     parse_iso(test_end, "test_end"), start);
    *out_train = new bzb_rows{std::move(split.train)};
    *out_test = new bzb_rows{std::move(split.test)};
  });
}

bzb_status bzb_rows_count(const bzb_rows* rows, long* out) {
  return guarded([&] {
    require(rows, "rows");
    require(out, "out");
    *out = long(rows->rows.size());
  });
}

bzb_status bzb_rows_write_csv(const bzb_rows* rows, const char* path) {
  return guarded([&] {
    require(rows, "rows");
    require(path, "path");
    buzz::write_rows_csv(rows->rows, path);
  });
}

void bzb_rows_free(bzb_rows* rows) { delete rows; }

/* fit ----------------------------------------------------------------- */

bzb_status bzb_fit_estimate(const bzb_rows* train, const char* model,
                            const char* const* fixed_effects, size_t n_fe, bzb_fit** out) {
  return guarded([&] {
    require(train, "train");
    require(out, "out");
    auto m = buzz::model_from_name(text_or(model, "pm"));
    if (!m) buzz::raise(buzz::Errc::invalid_argument, "model must be 'pm' or 'pm-no-rd'");
    std::vector<buzz::FeKind> fe = {buzz::FeKind::season, buzz::FeKind::tournament};
    if (n_fe > 0) {
      require(fixed_effects, "fixed_effects");
      fe.clear();
      for (size_t i = 0; i < n_fe; ++i) {
        require(fixed_effects[i], "fixed_effects[i]");
        auto kind = buzz::fe_kind_from_name(fixed_effects[i]);
        if (!kind)
          buzz::raise(buzz::Errc::invalid_argument,
                      std::string("unknown fixed effect '") + fixed_effects[i] + "'");
        fe.push_back(*kind);
      }
    }
    auto design = buzz::build_design(train->rows, *m, fe);
    *out = new bzb_fit{buzz::estimate_model(design)};
  });
}

bzb_status bzb_fit_to_json(const bzb_fit* fit, char** out_json) {
  return guarded([&] {
    require(fit, "fit");
    require(out_json, "out_json");
    *out_json = dup_string(fit->fit.to_json());
  });
}

bzb_status bzb_fit_from_json(const char* json, bzb_fit** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = new bzb_fit{buzz::RegressionFit::from_json(json)};
  });
}

void bzb_fit_free(bzb_fit* fit) { delete fit; }

/* backtest ------------------------------------------------------------ */

bzb_status bzb_backtest_run(const bzb_fit* fit, const bzb_rows* test, const char* strategy_json,
                            bzb_ledger** out) {
  return guarded([&] {
    require(fit, "fit");
    require(test, "test");
    require(out, "out");
    buzz::StrategyConfig config;
    if (strategy_json && *strategy_json) config = buzz::StrategyConfig::from_json(strategy_json);
    config.model = fit->fit.model;
    *out = new bzb_ledger{buzz::run_backtest(fit->fit, test->rows, config)};
  });
}

bzb_status bzb_ledger_summary(const bzb_ledger* ledger, const char* label, char** out_json) {
  return guarded([&] {
    require(ledger, "ledger");
    require(out_json, "out_json");
    auto summary = buzz::summarize(ledger->ledger);
    *out_json = dup_string(summary.to_json(text_or(label, "")));
  });
}

bzb_status bzb_ledger_write_csv(const bzb_ledger* ledger, const char* path) {
  return guarded([&] {
    require(ledger, "ledger");
    require(path, "path");
    buzz::write_ledger_csv(ledger->ledger, path);
  });
}

void bzb_ledger_free(bzb_ledger* ledger) { delete ledger; }

/* significance -------------------------------------------------------- */

bzb_status bzb_significance(const bzb_ledger* ledger, const char* config_json, char** out_json) {
  return guarded([&] {
    require(ledger, "ledger");
    require(out_json, "out_json");
    ordered_json j = parse_options(config_json, "significance config");
    buzz::SignificanceConfig cfg;
    cfg.trials = j.value("trials", cfg.trials);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.threads = j.value("threads", cfg.threads);
    std::string staking = j.value("staking", "unit");
    if (staking == "unit") cfg.staking = buzz::Staking::unit;
    else if (staking == "permuted") cfg.staking = buzz::Staking::permuted;
    else buzz::raise(buzz::Errc::invalid_argument, "staking must be 'unit' or 'permuted'");
    std::string metric = j.value("metric", "roi");
    if (metric == "roi") cfg.metric = buzz::Metric::roi;
    else if (metric == "absolute_return") cfg.metric = buzz::Metric::absolute_return;
    else buzz::raise(buzz::Errc::invalid_argument, "metric must be 'roi' or 'absolute_return'");
    auto result = buzz::random_strategy_pvalue(ledger->ledger, cfg);
    *out_json = dup_string(result.to_json());
  });
}

/* report -------------------------------------------------------------- */

bzb_status bzb_table_render(const char* table_json, const char* format, char** out) {
  return guarded([&] {
    require(table_json, "table_json");
    require(out, "out");
    auto fmt = buzz::table_format_from_name(text_or(format, "text"));
    if (!fmt)
      buzz::raise(buzz::Errc::invalid_argument, "format must be 'text', 'csv' or 'json'");
    auto table = buzz::table_from_json(table_json);
    *out = dup_string(buzz::render_table(table, *fmt));
  });
}

bzb_status bzb_replicate_all(const char* config_path, const char* out_dir,
                             char** out_manifest_json) {
  return guarded([&] {
    require(config_path, "config_path");
    require(out_dir, "out_dir");
    auto run = buzz::replicate_all_file(config_path, out_dir);
    if (out_manifest_json) *out_manifest_json = dup_string(run.to_json());
  });
}

/* pageviews ----------------------------------------------------------- */

bzb_status bzb_fetch_pageviews(const char* profile_key, const char* start, const char* end,
                               const char* options_json, char** out_series_json) {
  return guarded([&] {
    require(profile_key, "profile_key");
    require(out_series_json, "out_series_json");
    ordered_json j = parse_options(options_json, "fetch options");
    buzz::FetchOptions opts = fetch_options_from(j);
    auto series = buzz::fetch_daily_pageviews(profile_key, parse_iso(start, "start"),
                                              parse_iso(end, "end"), opts);
    ordered_json root;
    root["kind"] = "pageview_series";
    root["profile"] = series.profile_key;
    root["first_available"] = series.first_available.iso();
    ordered_json counts = ordered_json::object();
    for (const auto& [d, n] : series.counts) counts[d.iso()] = n;
    root["counts"] = std::move(counts);
    *out_series_json = dup_string(root.dump(2));
  });
}

} /* extern "C" */

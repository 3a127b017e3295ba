/* Betting-study backtester: C interface to the shared library.
 *
 * Every function returns a bzb_status; BZB_OK means success. On any other
 * status bzb_last_error() holds a message for the calling thread. Output
 * parameters are written only on success. Strings returned through char**
 * are heap copies the caller releases with bzb_string_free(); handles are
 * released with their matching *_free().
 */

#ifndef BUZZBACK_H
#define BUZZBACK_H

#include <stddef.h>

#if defined(_WIN32)
#define BZB_API __declspec(dllexport)
#else
#define BZB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bzb_status {
  BZB_OK = 0,
  BZB_ERR_INVALID_ARGUMENT,
  BZB_ERR_IO,
  BZB_ERR_PARSE,
  BZB_ERR_MISSING_COLUMN,
  BZB_ERR_BAD_DATE,
  BZB_ERR_BAD_ODDS,
  BZB_ERR_NON_POSITIVE_INPUT,
  BZB_ERR_MISSING_FEATURE,
  BZB_ERR_EMPTY_SPLIT,
  BZB_ERR_NOT_ENOUGH_ROWS,
  BZB_ERR_RANK_DEFICIENT,
  BZB_ERR_SINGLE_CLUSTER,
  BZB_ERR_DEGENERATE_SPREAD,
  BZB_ERR_UNKNOWN_MATCH_ID,
  BZB_ERR_UNKNOWN_LAYOUT,
  BZB_ERR_EMPTY_SERIES,
  BZB_ERR_EMPTY_UNIVERSE,
  BZB_ERR_UNIVERSE_TOO_SMALL,
  BZB_ERR_ZERO_INVESTMENT,
  BZB_ERR_PROFILE_NOT_FOUND,
  BZB_ERR_TRANSPORT,
  BZB_ERR_CACHE_MISS,
  BZB_ERR_INSUFFICIENT_HISTORY,
  BZB_ERR_INTERNAL
} bzb_status;

typedef struct bzb_dataset bzb_dataset; /* normalized match table */
typedef struct bzb_rows bzb_rows;       /* directed player-match rows */
typedef struct bzb_fit bzb_fit;         /* estimated forecast-error model */
typedef struct bzb_ledger bzb_ledger;   /* settled bet-by-bet record */

BZB_API const char* bzb_version(void);
BZB_API const char* bzb_status_name(bzb_status s);
/* Message for the most recent failure on this thread; empty after success. */
BZB_API const char* bzb_last_error(void);
BZB_API void bzb_string_free(char* s);

/* ------------------------------------------------------------------ dataset
 * schema_json (optional): {"delimiter", "date_format", "columns": {...},
 * "optional": [...]} mapping logical fields to CSV headers. */
BZB_API bzb_status bzb_dataset_ingest(const char* csv_path, const char* schema_json,
                                      bzb_dataset** out);
BZB_API bzb_status bzb_dataset_read_canonical(const char* csv_path, bzb_dataset** out);
BZB_API bzb_status bzb_dataset_write_canonical(const bzb_dataset* ds, const char* csv_path);
/* Counts, date span, player count, content fingerprint. */
BZB_API bzb_status bzb_dataset_info(const bzb_dataset* ds, char** out_json);

/* Four-step audited cleaning. options_json (optional): {"sigma": number,
 * "skip_steps": [1..4]}. out_report_json (optional) receives the audit. */
BZB_API bzb_status bzb_dataset_clean(const bzb_dataset* ds, const char* options_json,
                                     bzb_dataset** out_clean, char** out_report_json);
/* Every flag the cleaning filters would raise, without removing anything. */
BZB_API bzb_status bzb_dataset_anomalies(const bzb_dataset* ds, const char* options_json,
                                         char** out_json);
/* Remove whole matches by id. Unknown ids fail the call. */
BZB_API bzb_status bzb_dataset_exclude(const bzb_dataset* ds, const char* const* match_ids,
                                       size_t n_ids, bzb_dataset** out);
/* Fill the attention columns from a local pageview cache (and, when the
 * options select the live transport, the network). */
BZB_API bzb_status bzb_dataset_enrich(const bzb_dataset* ds, const char* options_json,
                                      bzb_dataset** out, char** out_stats_json);
BZB_API void bzb_dataset_free(bzb_dataset* ds);

/* --------------------------------------------------------------------- rows
 * odds_source: "average" (default), "bet365" or "best"; the implied
 * probability each row models. completed_only nonzero drops retirements
 * and walkovers first. */
BZB_API bzb_status bzb_rows_build(const bzb_dataset* ds, const char* odds_source,
                                  int completed_only, bzb_rows** out, char** out_exclusions_json);
BZB_API bzb_status bzb_rows_split(const bzb_rows* rows, const char* train_start,
                                  const char* train_end, const char* test_end,
                                  bzb_rows** out_train, bzb_rows** out_test);
BZB_API bzb_status bzb_rows_count(const bzb_rows* rows, long* out);
BZB_API bzb_status bzb_rows_write_csv(const bzb_rows* rows, const char* path);
BZB_API void bzb_rows_free(bzb_rows* rows);

/* ---------------------------------------------------------------------- fit
 * model: "pm" or "pm-no-rd". fixed_effects: names from {"season",
 * "tournament"}; pass n_fe = 0 for the default pair. */
BZB_API bzb_status bzb_fit_estimate(const bzb_rows* train, const char* model,
                                    const char* const* fixed_effects, size_t n_fe, bzb_fit** out);
BZB_API bzb_status bzb_fit_to_json(const bzb_fit* fit, char** out_json);
BZB_API bzb_status bzb_fit_from_json(const char* json, bzb_fit** out);
BZB_API void bzb_fit_free(bzb_fit* fit);

/* ----------------------------------------------------------------- backtest
 * strategy_json (optional): {"model", "bet_odds", "competitiveness",
 * "excluded_row_keys": ["<match_id>", "<match_id>:w", ...]}. */
BZB_API bzb_status bzb_backtest_run(const bzb_fit* fit, const bzb_rows* test,
                                    const char* strategy_json, bzb_ledger** out);
BZB_API bzb_status bzb_ledger_summary(const bzb_ledger* ledger, const char* label,
                                      char** out_json);
BZB_API bzb_status bzb_ledger_write_csv(const bzb_ledger* ledger, const char* path);
BZB_API void bzb_ledger_free(bzb_ledger* ledger);

/* -------------------------------------------------------------- resampling
 * config_json (optional): {"trials", "seed", "staking": "unit"|"permuted",
 * "metric": "roi"|"absolute_return", "threads"}. Result carries p_bs, the
 * count at or above the real value, and the sampling description. */
BZB_API bzb_status bzb_significance(const bzb_ledger* ledger, const char* config_json,
                                    char** out_json);

/* ------------------------------------------------------------------- report
 * Re-render a saved table artifact (the .json form) as "text", "csv" or
 * "json". */
BZB_API bzb_status bzb_table_render(const char* table_json, const char* format, char** out);
/* Run the whole study from a config file; writes tables, figures and a
 * manifest under out_dir and returns the manifest. */
BZB_API bzb_status bzb_replicate_all(const char* config_path, const char* out_dir,
                                     char** out_manifest_json);

/* ---------------------------------------------------------------- pageviews
 * options_json: {"transport": "fixture"|"live", "cache_dir", "endpoint",
 * "requests_per_second", "max_retries"}. Dates are ISO (YYYY-MM-DD).
 * Returns {"profile", "first_available", "counts": {date: views}}. */
BZB_API bzb_status bzb_fetch_pageviews(const char* profile_key, const char* start,
                                       const char* end, const char* options_json,
                                       char** out_series_json);

#ifdef __cplusplus
}
#endif

#endif /* BUZZBACK_H */

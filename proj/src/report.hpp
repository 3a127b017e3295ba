#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "backtest.hpp"
#include "clean.hpp"
#include "date.hpp"
#include "significance.hpp"
#include "table.hpp"

namespace buzz {

inline constexpr const char* kToolVersion = "0.1.0";

enum class TableFormat { text, csv, json };
std::optional<TableFormat> table_format_from_name(const std::string& name);

// Renders one table in the requested format. The three renderings agree
// value for value; JSON additionally carries the unrounded numbers.
// Unrecognized layout ids raise Errc::unknown_layout.
std::string render_table(const TableData& table, TableFormat format);

// Inverse of the JSON rendering, so saved table artifacts can be re-rendered.
TableData table_from_json(const std::string& text);

// Strategy results side by side, one column per label: row counts, bets,
// overround, investment, return, ROI.
TableData strategy_table(const std::vector<const StrategySummary*>& summaries,
                         const std::vector<std::string>& labels);

// Row audit of the four cleaning steps plus the final dataset shape.
TableData cleaning_table(const CleaningReport& report);

TableData significance_table(const std::vector<const SignificanceResult*>& results,
                             const std::vector<std::string>& labels);

struct PlotSeries {
  std::string label;
  bool dashed = false;
  std::vector<std::pair<Date, double>> points;
};

struct PlotOptions {
  std::string title;
  std::optional<Date> marker;  // dashed vertical line, e.g. a dataset boundary
  int width = 960;
  int height = 520;
};

// Standalone SVG: one polyline per series, the exact points embedded as a
// comment block so the graphic is never the only record of the numbers.
std::string render_pnl_svg(const std::vector<PlotSeries>& series, const PlotOptions& opts);

// Writes <stem>.svg and <stem>.csv (series,date,value rows).
void emit_pnl_plot(const std::vector<PlotSeries>& series, const PlotOptions& opts,
                   const std::string& path_stem);

// One bet singled out of a strategy by content, not by precomputed id.
struct RowSelector {
  Date date;
  std::string winner;
  std::string loser;
  Side side = Side::winner;
};

struct ReplicationConfig {
  std::string canonical_csv;
  bool clean = true;
  std::optional<double> sigma;  // pin the outlier-step spread estimate

  Date train_start = Date::from_ymd(2016, 1, 1);
  Date train_end = Date::from_ymd(2018, 12, 31);
  Date test_end = Date::from_ymd(2020, 2, 29);
  std::optional<Date> extended_end;  // enables the late-window fit + long P&L
  std::optional<Date> late_start;    // late-window lower bound; default train_end + 1
  std::string late_label;

  std::vector<FeKind> fixed_effects = {FeKind::season, FeKind::tournament};
  std::string competitive = "[0.2,0.8]";
  std::string tight = "[0.4,0.6]";
  std::vector<RowSelector> excluded_bets;

  long trials = 100000;
  std::uint64_t seed = 42;
  int threads = 0;

  static ReplicationConfig from_json(const std::string& text);
  static ReplicationConfig from_json_file(const std::string& path);
};

struct RunOutput {
  std::string name;
  std::string kind;  // "table" or "figure"
  std::vector<std::string> files;
  std::string fingerprint;  // content hash over the files in order
};

struct ReplicationRun {
  std::string config_digest;
  std::string dataset_fingerprint;
  std::string tool_version;
  std::vector<RunOutput> outputs;

  std::string to_json() const;
};

// Drives the whole study from one config: ingest, clean, fit, backtest,
// resample, render. Every artifact lands under out_dir together with a
// manifest; identical config + dataset bytes reproduce identical files.
ReplicationRun replicate_all(const ReplicationConfig& config, const std::string& config_digest,
                             const std::string& out_dir);
ReplicationRun replicate_all_file(const std::string& config_path, const std::string& out_dir);

}  // namespace buzz

// Command line front end. Talks to the engine exclusively through the C API
// so the shared library surface stays honest.

#include <CLI11.hpp>
#include <buzzback.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

using nlohmann::ordered_json;

namespace {

struct Failure {
  bzb_status status;
  std::string message;
};

void check(bzb_status s) {
  if (s != BZB_OK) throw Failure{s, bzb_last_error()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  bzb_string_free(s);
  return out;
}

using DatasetPtr = std::unique_ptr<bzb_dataset, decltype(&bzb_dataset_free)>;
using RowsPtr = std::unique_ptr<bzb_rows, decltype(&bzb_rows_free)>;
using FitPtr = std::unique_ptr<bzb_fit, decltype(&bzb_fit_free)>;
using LedgerPtr = std::unique_ptr<bzb_ledger, decltype(&bzb_ledger_free)>;

DatasetPtr wrap(bzb_dataset* p) { return DatasetPtr(p, &bzb_dataset_free); }
RowsPtr wrap(bzb_rows* p) { return RowsPtr(p, &bzb_rows_free); }
FitPtr wrap(bzb_fit* p) { return FitPtr(p, &bzb_fit_free); }
LedgerPtr wrap(bzb_ledger* p) { return LedgerPtr(p, &bzb_ledger_free); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{BZB_ERR_IO, "cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{BZB_ERR_IO, "cannot write " + path};
  out << content;
  if (!out) throw Failure{BZB_ERR_IO, "short write to " + path};
}

void deliver(const std::string& content, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << content;
    if (content.empty() || content.back() != '\n') std::cout << '\n';
  } else {
    write_file(out_path, content);
  }
}

// Options shared by the verbs that run the data pipeline.
struct PipelineOpts {
  std::string data;
  bool no_clean = false;
  double sigma = 0;
  bool sigma_set = false;
  std::string odds_source = "average";
  std::string train_start;
  std::string train_end = "2018-12-31";
  std::string test_end = "2020-02-29";
  std::string model = "pm";
  std::vector<std::string> fixed_effects;
  std::string fit_path;  // reuse a saved fit instead of estimating
};

void add_data_opts(CLI::App* cmd, PipelineOpts& p) {
  cmd->add_option("data", p.data, "canonical dataset CSV")->required();
  cmd->add_flag("--no-clean", p.no_clean, "skip the cleaning pipeline");
  cmd->add_option("--sigma", p.sigma, "pin the outlier-step spread estimate")
      ->each([&p](const std::string&) { p.sigma_set = true; });
}

void add_model_opts(CLI::App* cmd, PipelineOpts& p) {
  cmd->add_option("--train-start", p.train_start, "first training day (default 2016-01-01)");
  cmd->add_option("--train-end", p.train_end, "last training day");
  cmd->add_option("--test-end", p.test_end, "last test day");
  cmd->add_option("--model", p.model, "pm or pm-no-rd");
  cmd->add_option("--fe", p.fixed_effects, "fixed effect blocks (season, tournament)");
  cmd->add_option("--fit", p.fit_path, "saved fit JSON; skips estimation");
}

DatasetPtr load_dataset(const PipelineOpts& p) {
  bzb_dataset* raw = nullptr;
  check(bzb_dataset_read_canonical(p.data.c_str(), &raw));
  auto ds = wrap(raw);
  if (p.no_clean) return ds;
  ordered_json opts = ordered_json::object();
  if (p.sigma_set) opts["sigma"] = p.sigma;
  bzb_dataset* cleaned = nullptr;
  check(bzb_dataset_clean(ds.get(), opts.dump().c_str(), &cleaned, nullptr));
  return wrap(cleaned);
}

RowsPtr build_rows(const DatasetPtr& ds, const PipelineOpts& p) {
  bzb_rows* raw = nullptr;
  check(bzb_rows_build(ds.get(), p.odds_source.c_str(), 1, &raw, nullptr));
  return wrap(raw);
}

struct SplitRows {
  RowsPtr train;
  RowsPtr test;
};

SplitRows split_rows(const RowsPtr& rows, const PipelineOpts& p) {
  bzb_rows *train = nullptr, *test = nullptr;
  check(bzb_rows_split(rows.get(), p.train_start.empty() ? nullptr : p.train_start.c_str(),
                       p.train_end.c_str(), p.test_end.c_str(), &train, &test));
  return {wrap(train), wrap(test)};
}

FitPtr obtain_fit(const RowsPtr& train, const PipelineOpts& p) {
  bzb_fit* raw = nullptr;
  if (!p.fit_path.empty()) {
    check(bzb_fit_from_json(read_file(p.fit_path).c_str(), &raw));
    return wrap(raw);
  }
  std::vector<const char*> fe;
  for (const auto& f : p.fixed_effects) fe.push_back(f.c_str());
  check(bzb_fit_estimate(train.get(), p.model.c_str(), fe.empty() ? nullptr : fe.data(), fe.size(),
                         &raw));
  return wrap(raw);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("betting study backtester ") + bzb_version()};
  app.require_subcommand(1);

  std::string out_path;
  std::string format = "text";
  long long seed = 42;
  app.add_option("--out", out_path, "write the primary result here instead of stdout")
      ->group("Global");
  app.add_option("--format", format, "text, csv or json")->group("Global");
  app.add_option("--seed", seed, "random seed for resampling")->group("Global");

  // ingest
  auto* c_ingest = app.add_subcommand("ingest", "parse a raw odds CSV into the canonical form");
  std::string ingest_csv, ingest_schema, ingest_out;
  c_ingest->add_option("csv", ingest_csv, "raw match/odds CSV")->required();
  c_ingest->add_option("--schema", ingest_schema, "schema JSON mapping the columns");
  c_ingest->add_option("--write", ingest_out, "write the canonical CSV here");

  // clean
  auto* c_clean = app.add_subcommand("clean", "run the four-step cleaning audit");
  PipelineOpts p_clean;
  c_clean->add_option("data", p_clean.data, "canonical dataset CSV")->required();
  double clean_sigma = 0;
  bool clean_sigma_set = false;
  std::vector<int> clean_skip;
  std::string clean_out;
  c_clean->add_option("--sigma", clean_sigma, "pin the outlier-step spread estimate")
      ->each([&](const std::string&) { clean_sigma_set = true; });
  c_clean->add_option("--skip-step", clean_skip, "1-based steps to skip");
  c_clean->add_option("--write", clean_out, "write the cleaned canonical CSV here");

  // features
  auto* c_features = app.add_subcommand("features", "emit directed player-match rows");
  PipelineOpts p_feat;
  add_data_opts(c_features, p_feat);
  c_features->add_option("--odds-source", p_feat.odds_source, "bet365, average or best");
  std::string features_out;
  c_features->add_option("--write", features_out, "rows CSV path")->required();

  // estimate
  auto* c_estimate = app.add_subcommand("estimate", "fit the forecast-error model");
  PipelineOpts p_est;
  add_data_opts(c_estimate, p_est);
  add_model_opts(c_estimate, p_est);

  // backtest
  auto* c_backtest = app.add_subcommand("backtest", "run the Kelly strategy on the test window");
  PipelineOpts p_bt;
  add_data_opts(c_backtest, p_bt);
  add_model_opts(c_backtest, p_bt);
  std::string bt_odds = "bet365", bt_bands, bt_ledger_out, bt_label;
  std::vector<std::string> bt_exclude;
  c_backtest->add_option("--bet-odds", bt_odds, "odds source bets settle against");
  c_backtest->add_option("--competitiveness", bt_bands, "implied-probability bands, e.g. [0.4,0.6]");
  c_backtest->add_option("--exclude-bet", bt_exclude, "row keys (<match_id> or <match_id>:w/:l)");
  c_backtest->add_option("--ledger", bt_ledger_out, "write the bet-by-bet CSV here");
  c_backtest->add_option("--label", bt_label, "label for the summary");

  // significance
  auto* c_sig = app.add_subcommand("significance", "random-strategy p-value for a backtest");
  PipelineOpts p_sig;
  add_data_opts(c_sig, p_sig);
  add_model_opts(c_sig, p_sig);
  std::string sig_odds = "bet365", sig_bands, sig_staking = "unit", sig_metric = "roi";
  std::vector<std::string> sig_exclude;
  long sig_trials = 100000;
  int sig_threads = 0;
  c_sig->add_option("--bet-odds", sig_odds, "odds source bets settle against");
  c_sig->add_option("--competitiveness", sig_bands, "implied-probability bands");
  c_sig->add_option("--exclude-bet", sig_exclude, "row keys to drop");
  c_sig->add_option("--trials", sig_trials, "number of random strategies");
  c_sig->add_option("--staking", sig_staking, "unit or permuted");
  c_sig->add_option("--metric", sig_metric, "roi or absolute_return");
  c_sig->add_option("--threads", sig_threads, "worker threads (0 = auto)");

  // report
  auto* c_report = app.add_subcommand("report", "re-render a saved table artifact");
  std::string report_table;
  c_report->add_option("table", report_table, "table artifact (.json)")->required();

  // replicate-all
  auto* c_rep = app.add_subcommand("replicate-all", "drive the whole study from a config");
  std::string rep_config, rep_out_dir = "out";
  c_rep->add_option("--config", rep_config, "replication config JSON")->required();
  c_rep->add_option("--out-dir", rep_out_dir, "artifact directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_ingest) {
      bzb_dataset* raw = nullptr;
      std::string schema_json = ingest_schema.empty() ? "" : read_file(ingest_schema);
      check(bzb_dataset_ingest(ingest_csv.c_str(), schema_json.empty() ? nullptr : schema_json.c_str(),
                               &raw));
      auto ds = wrap(raw);
      if (!ingest_out.empty()) check(bzb_dataset_write_canonical(ds.get(), ingest_out.c_str()));
      char* info = nullptr;
      check(bzb_dataset_info(ds.get(), &info));
      deliver(take(info), out_path);
    } else if (*c_clean) {
      bzb_dataset* raw = nullptr;
      check(bzb_dataset_read_canonical(p_clean.data.c_str(), &raw));
      auto ds = wrap(raw);
      ordered_json opts = ordered_json::object();
      if (clean_sigma_set) opts["sigma"] = clean_sigma;
      if (!clean_skip.empty()) opts["skip_steps"] = clean_skip;
      bzb_dataset* cleaned_raw = nullptr;
      char* report = nullptr;
      check(bzb_dataset_clean(ds.get(), opts.dump().c_str(), &cleaned_raw, &report));
      auto cleaned = wrap(cleaned_raw);
      if (!clean_out.empty()) check(bzb_dataset_write_canonical(cleaned.get(), clean_out.c_str()));
      deliver(take(report), out_path);
    } else if (*c_features) {
      auto ds = load_dataset(p_feat);
      bzb_rows* raw = nullptr;
      char* exclusions = nullptr;
      check(bzb_rows_build(ds.get(), p_feat.odds_source.c_str(), 1, &raw, &exclusions));
      auto rows = wrap(raw);
      check(bzb_rows_write_csv(rows.get(), features_out.c_str()));
      long n = 0;
      check(bzb_rows_count(rows.get(), &n));
      ordered_json summary;
      summary["rows"] = n;
      summary["excluded"] = ordered_json::parse(take(exclusions));
      deliver(summary.dump(2), out_path);
    } else if (*c_estimate) {
      auto ds = load_dataset(p_est);
      auto rows = build_rows(ds, p_est);
      auto split = split_rows(rows, p_est);
      auto fit = obtain_fit(split.train, p_est);
      char* json = nullptr;
      check(bzb_fit_to_json(fit.get(), &json));
      deliver(take(json), out_path);
    } else if (*c_backtest) {
      auto ds = load_dataset(p_bt);
      auto rows = build_rows(ds, p_bt);
      auto split = split_rows(rows, p_bt);
      auto fit = obtain_fit(split.train, p_bt);
      ordered_json strategy;
      strategy["bet_odds"] = bt_odds;
      if (!bt_bands.empty()) strategy["competitiveness"] = bt_bands;
      if (!bt_exclude.empty()) strategy["excluded_row_keys"] = bt_exclude;
      bzb_ledger* raw = nullptr;
      check(bzb_backtest_run(fit.get(), split.test.get(), strategy.dump().c_str(), &raw));
      auto ledger = wrap(raw);
      if (!bt_ledger_out.empty()) check(bzb_ledger_write_csv(ledger.get(), bt_ledger_out.c_str()));
      char* summary = nullptr;
      check(bzb_ledger_summary(ledger.get(), bt_label.empty() ? nullptr : bt_label.c_str(),
                               &summary));
      deliver(take(summary), out_path);
    } else if (*c_sig) {
      auto ds = load_dataset(p_sig);
      auto rows = build_rows(ds, p_sig);
      auto split = split_rows(rows, p_sig);
      auto fit = obtain_fit(split.train, p_sig);
      ordered_json strategy;
      strategy["bet_odds"] = sig_odds;
      if (!sig_bands.empty()) strategy["competitiveness"] = sig_bands;
      if (!sig_exclude.empty()) strategy["excluded_row_keys"] = sig_exclude;
      bzb_ledger* raw = nullptr;
      check(bzb_backtest_run(fit.get(), split.test.get(), strategy.dump().c_str(), &raw));
      auto ledger = wrap(raw);
      ordered_json cfg;
      cfg["trials"] = sig_trials;
      cfg["seed"] = seed;
      cfg["staking"] = sig_staking;
      cfg["metric"] = sig_metric;
      cfg["threads"] = sig_threads;
      char* result = nullptr;
      check(bzb_significance(ledger.get(), cfg.dump().c_str(), &result));
      deliver(take(result), out_path);
    } else if (*c_report) {
      char* rendered = nullptr;
      check(bzb_table_render(read_file(report_table).c_str(), format.c_str(), &rendered));
      deliver(take(rendered), out_path);
    } else if (*c_rep) {
      char* manifest = nullptr;
      check(bzb_replicate_all(rep_config.c_str(), rep_out_dir.c_str(), &manifest));
      deliver(take(manifest), out_path);
    }
  } catch (const Failure& f) {
    std::cerr << "error (" << bzb_status_name(f.status) << "): " << f.message << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

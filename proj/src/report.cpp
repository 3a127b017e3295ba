#include "report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "errors.hpp"
#include "estimate.hpp"
#include "hash.hpp"
#include "ingest.hpp"

namespace buzz {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kLayouts = {"coefficients", "strategy", "cleaning", "significance"};

std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return std::string(buf);
}

std::string cell_text(const std::vector<TableCell>& row, std::size_t i) {
  return i < row.size() ? row[i].text : std::string();
}

std::string table_text(const TableData& t) {
  std::size_t ncols = t.col_labels.size();
  for (const auto& r : t.cells) ncols = std::max(ncols, r.size());

  std::vector<std::size_t> width(ncols + 1, 0);
  for (const auto& label : t.row_labels) width[0] = std::max(width[0], label.size());
  for (std::size_t c = 0; c < t.col_labels.size(); ++c)
    width[c + 1] = std::max(width[c + 1], t.col_labels[c].size());
  for (const auto& r : t.cells)
    for (std::size_t c = 0; c < r.size(); ++c) width[c + 1] = std::max(width[c + 1], r[c].text.size());

  auto pad_left = [](const std::string& s, std::size_t w) {
    return std::string(w - std::min(w, s.size()), ' ') + s;
  };
  auto pad_right = [](const std::string& s, std::size_t w) {
    return s + std::string(w - std::min(w, s.size()), ' ');
  };

  std::string out;
  if (!t.title.empty()) out += t.title + "\n";
  std::string header = pad_right("", width[0]);
  for (std::size_t c = 0; c < ncols; ++c)
    header += "  " + pad_left(c < t.col_labels.size() ? t.col_labels[c] : "", width[c + 1]);
  out += header + "\n";
  out += std::string(header.size(), '-') + "\n";
  for (std::size_t r = 0; r < t.cells.size(); ++r) {
    std::string line = pad_right(r < t.row_labels.size() ? t.row_labels[r] : "", width[0]);
    for (std::size_t c = 0; c < ncols; ++c) line += "  " + pad_left(cell_text(t.cells[r], c), width[c + 1]);
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  for (const auto& note : t.footnotes) out += "note: " + note + "\n";
  return out;
}

std::string table_csv(const TableData& t) {
  std::size_t ncols = t.col_labels.size();
  for (const auto& r : t.cells) ncols = std::max(ncols, r.size());

  std::string out;
  std::vector<std::string> header{""};
  for (std::size_t c = 0; c < ncols; ++c)
    header.push_back(c < t.col_labels.size() ? t.col_labels[c] : "");
  out += write_csv_row(header);
  for (std::size_t r = 0; r < t.cells.size(); ++r) {
    std::vector<std::string> row{r < t.row_labels.size() ? t.row_labels[r] : ""};
    for (std::size_t c = 0; c < ncols; ++c) row.push_back(cell_text(t.cells[r], c));
    out += write_csv_row(row);
  }
  return out;
}

std::string table_json(const TableData& t) {
  ordered_json j;
  j["kind"] = "table";
  j["id"] = t.id;
  j["layout"] = t.layout;
  j["title"] = t.title;
  j["columns"] = t.col_labels;
  ordered_json rows = ordered_json::array();
  for (std::size_t r = 0; r < t.cells.size(); ++r) {
    ordered_json row;
    row["label"] = r < t.row_labels.size() ? t.row_labels[r] : "";
    ordered_json cells = ordered_json::array();
    for (const auto& c : t.cells[r]) {
      ordered_json cell;
      cell["text"] = c.text;
      if (c.value) cell["value"] = *c.value;
      cells.push_back(std::move(cell));
    }
    row["cells"] = std::move(cells);
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  j["footnotes"] = t.footnotes;
  return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io, "cannot write " + path);
  out.write(content.data(), std::streamsize(content.size()));
  if (!out) raise(Errc::io, "short write to " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::optional<TableFormat> table_format_from_name(const std::string& name) {
  if (name == "text") return TableFormat::text;
  if (name == "csv") return TableFormat::csv;
  if (name == "json") return TableFormat::json;
  return std::nullopt;
}

TableData table_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    raise(Errc::parse, std::string("bad table artifact: ") + e.what());
  }
  if (j.value("kind", "") != "table") raise(Errc::parse, "not a table artifact");
  TableData t;
  t.id = j.value("id", "");
  t.layout = j.value("layout", "");
  t.title = j.value("title", "");
  t.col_labels = j.value("columns", std::vector<std::string>{});
  for (const auto& row : j.value("rows", ordered_json::array())) {
    t.row_labels.push_back(row.value("label", ""));
    std::vector<TableCell> cells;
    for (const auto& c : row.value("cells", ordered_json::array())) {
      TableCell cell;
      cell.text = c.value("text", "");
      if (c.contains("value")) cell.value = c["value"].get<double>();
      cells.push_back(std::move(cell));
    }
    t.cells.push_back(std::move(cells));
  }
  t.footnotes = j.value("footnotes", std::vector<std::string>{});
  return t;
}

std::string render_table(const TableData& table, TableFormat format) {
  if (!kLayouts.count(table.layout))
    raise(Errc::unknown_layout, "no table layout named '" + table.layout + "'");
  switch (format) {
    case TableFormat::text: return table_text(table);
    case TableFormat::csv: return table_csv(table);
    case TableFormat::json: return table_json(table);
  }
  raise(Errc::internal, "unhandled table format");
}

TableData strategy_table(const std::vector<const StrategySummary*>& summaries,
                         const std::vector<std::string>& labels) {
  if (summaries.empty() || summaries.size() != labels.size())
    raise(Errc::invalid_argument, "need one label per strategy summary");

  TableData t;
  t.id = "strategy";
  t.layout = "strategy";
  t.title = "Reset-bankroll Kelly betting results";
  t.col_labels = labels;

  struct RowDef {
    const char* label;
    int decimals;
  };
  static const RowDef defs[] = {
      {"rows with odds", 0},   {"mean overround (%)", 2}, {"bets placed", 0},
      {"total investment", 2}, {"absolute return", 2},    {"return on investment (%)", 2},
  };

  for (const RowDef& def : defs) {
    std::vector<TableCell> row;
    for (const auto* s : summaries) {
      std::optional<double> v;
      std::string name = def.label;
      if (name == "rows with odds") v = double(s->n_odds);
      else if (name == "mean overround (%)") v = s->mean_overround_pct;
      else if (name == "bets placed") v = double(s->bets_placed);
      else if (name == "total investment") v = s->investment;
      else if (name == "absolute return") v = s->absolute_return;
      else v = s->roi_pct;
      if (!v) row.push_back(TableCell("-"));
      else row.push_back(TableCell(fmt(*v, def.decimals), *v));
    }
    t.row_labels.push_back(def.label);
    t.cells.push_back(std::move(row));
  }
  return t;
}

TableData cleaning_table(const CleaningReport& report) {
  TableData t;
  t.id = "cleaning";
  t.layout = "cleaning";
  t.title = "Dataset cleaning audit";
  t.col_labels = {"rows before", "rows removed", "rows after"};
  for (const auto& step : report.steps) {
    long after = step.rows_before - step.rows_removed;
    t.row_labels.push_back(step.name);
    t.cells.push_back({TableCell(std::to_string(step.rows_before), double(step.rows_before)),
                       TableCell(std::to_string(step.rows_removed), double(step.rows_removed)),
                       TableCell(std::to_string(after), double(after))});
  }
  t.row_labels.push_back("final rows");
  t.cells.push_back({TableCell(""), TableCell(""),
                     TableCell(std::to_string(report.rows_final), double(report.rows_final))});
  t.row_labels.push_back("final matches");
  t.cells.push_back({TableCell(""), TableCell(""),
                     TableCell(std::to_string(report.matches_final), double(report.matches_final))});
  t.row_labels.push_back("final players");
  t.cells.push_back({TableCell(""), TableCell(""),
                     TableCell(std::to_string(report.players_final), double(report.players_final))});
  if (report.sigma_used)
    t.footnotes.push_back("best-vs-average outlier spread estimate: " + fmt(*report.sigma_used, 6));
  return t;
}

TableData significance_table(const std::vector<const SignificanceResult*>& results,
                             const std::vector<std::string>& labels) {
  if (results.empty() || results.size() != labels.size())
    raise(Errc::invalid_argument, "need one label per significance result");
  TableData t;
  t.id = "significance";
  t.layout = "significance";
  t.title = "Random-strategy comparison";
  t.col_labels = labels;

  auto push_row = [&](const std::string& label, auto value, int decimals) {
    std::vector<TableCell> row;
    for (std::size_t i = 0; i < results.size(); ++i) {
      double v = double(value(*results[i]));
      row.push_back(TableCell(fmt(v, decimals), v));
    }
    t.row_labels.push_back(label);
    t.cells.push_back(std::move(row));
  };
  push_row("p (random >= real)", [](const SignificanceResult& r) { return r.p_bs; }, 3);
  push_row("trials", [](const SignificanceResult& r) { return r.trials; }, 0);
  push_row("bets per trial", [](const SignificanceResult& r) { return r.n_bets; }, 0);
  push_row("universe rows", [](const SignificanceResult& r) { return r.universe_size; }, 0);
  push_row("real metric value", [](const SignificanceResult& r) { return r.real_value; }, 4);
  t.footnotes.push_back(std::string("staking: ") + staking_name(results[0]->staking) +
                        ", metric: " + metric_name(results[0]->metric));
  return t;
}

// ---------------------------------------------------------------------------
// P&L figure

std::string render_pnl_svg(const std::vector<PlotSeries>& series, const PlotOptions& opts) {
  bool any_points = false;
  for (const auto& s : series) any_points = any_points || !s.points.empty();
  if (series.empty() || !any_points) raise(Errc::empty_series, "nothing to plot");

  Date xmin = Date::from_serial(INT32_MAX), xmax = Date::from_serial(INT32_MIN);
  double ymin = 0, ymax = 0;  // always include the zero line
  for (const auto& s : series)
    for (const auto& [d, v] : s.points) {
      if (d < xmin) xmin = d;
      if (d > xmax) xmax = d;
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  if (opts.marker) {
    if (*opts.marker < xmin) xmin = *opts.marker;
    if (*opts.marker > xmax) xmax = *opts.marker;
  }
  if (ymax == ymin) ymax = ymin + 1;
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double ml = 72, mr = 24, mt = 42, mb = 46;
  const double pw = opts.width - ml - mr, ph = opts.height - mt - mb;
  long xspan = std::max(1L, long(xmax.serial()) - long(xmin.serial()));
  auto px = [&](Date d) { return ml + pw * double(d.serial() - xmin.serial()) / double(xspan); };
  auto py = [&](double v) { return mt + ph * (ymax - v) / (ymax - ymin); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width << "\" height=\""
      << opts.height << "\" viewBox=\"0 0 " << opts.width << " " << opts.height << "\">\n";

  svg << "<!-- points\nseries,date,value\n";
  for (const auto& s : series)
    for (const auto& [d, v] : s.points) svg << s.label << "," << d.iso() << "," << fmt(v, 6) << "\n";
  svg << "-->\n";

  svg << "<rect width=\"" << opts.width << "\" height=\"" << opts.height
      << "\" fill=\"#ffffff\"/>\n";
  if (!opts.title.empty())
    svg << "<text x=\"" << ml << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" "
           "fill=\"#222222\">"
        << opts.title << "</text>\n";

  // y grid: 5 evenly spaced ticks
  for (int i = 0; i <= 4; ++i) {
    double v = ymin + (ymax - ymin) * i / 4.0;
    double y = py(v);
    svg << "<line x1=\"" << fmt(ml, 1) << "\" y1=\"" << fmt(y, 1) << "\" x2=\"" << fmt(ml + pw, 1)
        << "\" y2=\"" << fmt(y, 1) << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << fmt(ml - 6, 1) << "\" y=\"" << fmt(y + 4, 1)
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555555\" text-anchor=\"end\">"
        << fmt(v, 2) << "</text>\n";
  }
  // zero line darker when inside the range
  if (ymin < 0 && ymax > 0)
    svg << "<line x1=\"" << fmt(ml, 1) << "\" y1=\"" << fmt(py(0), 1) << "\" x2=\""
        << fmt(ml + pw, 1) << "\" y2=\"" << fmt(py(0), 1) << "\" stroke=\"#999999\"/>\n";

  // x ticks at year starts, plus the range ends
  std::vector<Date> xticks{xmin};
  for (int y = xmin.year() + 1; y <= xmax.year(); ++y) xticks.push_back(Date::from_ymd(y, 1, 1));
  if (xticks.back() != xmax) xticks.push_back(xmax);
  for (Date d : xticks) {
    if (d < xmin || d > xmax) continue;
    double x = px(d);
    svg << "<line x1=\"" << fmt(x, 1) << "\" y1=\"" << fmt(mt + ph, 1) << "\" x2=\"" << fmt(x, 1)
        << "\" y2=\"" << fmt(mt + ph + 5, 1) << "\" stroke=\"#555555\"/>\n";
    svg << "<text x=\"" << fmt(x, 1) << "\" y=\"" << fmt(mt + ph + 18, 1)
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555555\" "
           "text-anchor=\"middle\">"
        << d.iso() << "</text>\n";
  }
  svg << "<rect x=\"" << fmt(ml, 1) << "\" y=\"" << fmt(mt, 1) << "\" width=\"" << fmt(pw, 1)
      << "\" height=\"" << fmt(ph, 1) << "\" fill=\"none\" stroke=\"#555555\"/>\n";

  if (opts.marker) {
    double x = px(*opts.marker);
    svg << "<line x1=\"" << fmt(x, 1) << "\" y1=\"" << fmt(mt, 1) << "\" x2=\"" << fmt(x, 1)
        << "\" y2=\"" << fmt(mt + ph, 1)
        << "\" stroke=\"#888888\" stroke-dasharray=\"3 3\"/>\n";
    svg << "<text x=\"" << fmt(x + 4, 1) << "\" y=\"" << fmt(mt + 12, 1)
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#888888\">" << opts.marker->iso()
        << "</text>\n";
  }

  static const char* kPalette[] = {"#1f6f8b", "#c0392b", "#2c7a4b", "#8e44ad", "#b07b2a"};
  for (std::size_t i = 0; i < series.size(); ++i) {
    const PlotSeries& s = series[i];
    if (s.points.empty()) continue;
    const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
    if (s.points.size() == 1) {
      svg << "<circle cx=\"" << fmt(px(s.points[0].first), 2) << "\" cy=\""
          << fmt(py(s.points[0].second), 2) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    } else {
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\"";
      if (s.dashed) svg << " stroke-dasharray=\"6 4\"";
      svg << " points=\"";
      for (const auto& [d, v] : s.points) svg << fmt(px(d), 2) << "," << fmt(py(v), 2) << " ";
      svg << "\"/>\n";
    }
    double lx = ml + 10, ly = mt + 16 + 16 * double(i);
    svg << "<line x1=\"" << fmt(lx, 1) << "\" y1=\"" << fmt(ly - 4, 1) << "\" x2=\""
        << fmt(lx + 22, 1) << "\" y2=\"" << fmt(ly - 4, 1) << "\" stroke=\"" << color
        << "\" stroke-width=\"1.6\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    svg << "<text x=\"" << fmt(lx + 28, 1) << "\" y=\"" << fmt(ly, 1)
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\">" << s.label
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_pnl_plot(const std::vector<PlotSeries>& series, const PlotOptions& opts,
                   const std::string& path_stem) {
  write_file(path_stem + ".svg", render_pnl_svg(series, opts));
  std::string csv = "series,date,value\n";
  for (const auto& s : series)
    for (const auto& [d, v] : s.points)
      csv += csv_escape(s.label) + "," + d.iso() + "," + format_double(v) + "\n";
  write_file(path_stem + ".csv", csv);
}

// ---------------------------------------------------------------------------
// Whole-study driver

ReplicationConfig ReplicationConfig::from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    raise(Errc::parse, std::string("bad replication config: ") + e.what());
  }
  ReplicationConfig c;
  if (!j.contains("canonical_csv")) raise(Errc::invalid_argument, "config needs canonical_csv");
  c.canonical_csv = j["canonical_csv"].get<std::string>();
  c.clean = j.value("clean", true);
  if (j.contains("sigma") && !j["sigma"].is_null()) c.sigma = j["sigma"].get<double>();

  auto date_of = [&](const char* key, Date fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    return Date::parse(j[key].get<std::string>(), DateFormat::iso);
  };
  c.train_start = date_of("train_start", c.train_start);
  c.train_end = date_of("train_end", c.train_end);
  c.test_end = date_of("test_end", c.test_end);
  if (j.contains("extended_end") && !j["extended_end"].is_null())
    c.extended_end = Date::parse(j["extended_end"].get<std::string>(), DateFormat::iso);
  if (j.contains("late_start") && !j["late_start"].is_null())
    c.late_start = Date::parse(j["late_start"].get<std::string>(), DateFormat::iso);
  c.late_label = j.value("late_label", std::string());

  if (j.contains("fixed_effects")) {
    c.fixed_effects.clear();
    for (const auto& name : j["fixed_effects"]) {
      auto kind = fe_kind_from_name(name.get<std::string>());
      if (!kind) raise(Errc::invalid_argument, "unknown fixed effect '" + name.get<std::string>() + "'");
      c.fixed_effects.push_back(*kind);
    }
  }
  c.competitive = j.value("competitive", c.competitive);
  c.tight = j.value("tight", c.tight);
  for (const auto& sel : j.value("excluded_bets", ordered_json::array())) {
    RowSelector rs;
    rs.date = Date::parse(sel.at("date").get<std::string>(), DateFormat::iso);
    rs.winner = sel.at("winner").get<std::string>();
    rs.loser = sel.at("loser").get<std::string>();
    std::string side = sel.value("side", "w");
    if (side != "w" && side != "l") raise(Errc::invalid_argument, "bet side must be 'w' or 'l'");
    rs.side = side == "w" ? Side::winner : Side::loser;
    c.excluded_bets.push_back(std::move(rs));
  }
  if (j.contains("significance")) {
    const auto& s = j["significance"];
    c.trials = s.value("trials", c.trials);
    c.seed = s.value("seed", c.seed);
    c.threads = s.value("threads", c.threads);
  }
  return c;
}

ReplicationConfig ReplicationConfig::from_json_file(const std::string& path) {
  return from_json(read_file(path));
}

namespace {

std::vector<std::string> resolve_selectors(const Dataset& ds,
                                           const std::vector<RowSelector>& selectors) {
  std::vector<std::string> keys;
  for (const auto& sel : selectors) {
    const MatchRecord* hit = nullptr;
    for (const auto& m : ds.matches)
      if (m.date == sel.date && m.player_w == sel.winner && m.player_l == sel.loser) {
        hit = &m;
        break;
      }
    if (!hit)
      raise(Errc::unknown_match_id, "no match on " + sel.date.iso() + ": " + sel.winner + " v " +
                                        sel.loser);
    keys.push_back(hit->match_id + ":" + side_name(sel.side));
  }
  return keys;
}

struct Emitter {
  std::string out_dir;
  std::vector<RunOutput> outputs;

  void table(TableData t, const std::string& name, const std::string& title) {
    t.id = name;
    t.title = title;
    RunOutput o;
    o.name = name;
    o.kind = "table";
    std::uint64_t h = fnv1a64("output.v1");
    for (TableFormat f : {TableFormat::text, TableFormat::csv, TableFormat::json}) {
      const char* ext = f == TableFormat::text ? ".txt" : f == TableFormat::csv ? ".csv" : ".json";
      std::string content = render_table(t, f);
      std::string path = out_dir + "/" + name + ext;
      write_file(path, content);
      o.files.push_back(name + ext);
      h = fnv1a64(content, h);
    }
    o.fingerprint = hex16(h);
    outputs.push_back(std::move(o));
  }

  void figure(const std::vector<PlotSeries>& series, const PlotOptions& opts,
              const std::string& name) {
    emit_pnl_plot(series, opts, out_dir + "/" + name);
    RunOutput o;
    o.name = name;
    o.kind = "figure";
    std::uint64_t h = fnv1a64("output.v1");
    for (const char* ext : {".svg", ".csv"}) {
      o.files.push_back(name + ext);
      h = fnv1a64(read_file(out_dir + "/" + name + ext), h);
    }
    o.fingerprint = hex16(h);
    outputs.push_back(std::move(o));
  }
};

}  // namespace

ReplicationRun replicate_all(const ReplicationConfig& cfg, const std::string& config_digest,
                             const std::string& out_dir) {
  fs::create_directories(out_dir);
  Emitter emit{out_dir, {}};

  Dataset ds = read_canonical_csv(cfg.canonical_csv);
  std::string dataset_fp = ds.fingerprint();

  CleaningReport cleaning;
  if (cfg.clean) {
    CleanOptions opts;
    opts.sigma = cfg.sigma;
    CleanResult res = run_pipeline(ds, opts);
    ds = std::move(res.dataset);
    cleaning = std::move(res.report);
  } else {
    cleaning.rows_final = ds.n_rows();
    cleaning.matches_final = long(ds.matches.size());
    cleaning.players_final = ds.n_players();
  }
  TableData t_clean = cleaning_table(cleaning);
  if (!cfg.clean) t_clean.footnotes.push_back("cleaning pipeline disabled by config");

  Dataset completed = filter_completed(ds);
  RowBuildResult built = to_player_rows(completed);
  SplitResult split = split_samples(built.rows, cfg.train_end, cfg.test_end, cfg.train_start);

  RegressionFit fit_pm = estimate_model(build_design(split.train, Model::pm, cfg.fixed_effects));
  RegressionFit fit_nrd =
      estimate_model(build_design(split.train, Model::pm_no_rd, cfg.fixed_effects));
  emit.table(mispricing_table({&fit_pm, &fit_nrd}, {"full model", "no rank distance"}),
             "insample_coefficients", "In-sample forecast error estimates");

  std::vector<std::string> excluded_keys = resolve_selectors(completed, cfg.excluded_bets);
  std::string excl_note = excluded_keys.empty()
                              ? std::string()
                              : "excl. = without " + std::to_string(excluded_keys.size()) +
                                    " configured bet(s)";

  auto backtest = [&](const RegressionFit& fit, OddsSource src,
                      const std::vector<Interval>& intervals, bool drop) {
    StrategyConfig sc;
    sc.model = fit.model;
    sc.bet_odds = src;
    sc.competitiveness = intervals;
    if (drop) sc.excluded_row_keys = excluded_keys;
    return run_backtest(fit, split.test, sc);
  };
  SignificanceConfig sig_cfg;
  sig_cfg.trials = cfg.trials;
  sig_cfg.seed = cfg.seed;
  sig_cfg.threads = cfg.threads;

  // Bet365 headline strategies
  {
    StrategySummary a = summarize(backtest(fit_pm, OddsSource::bet365, {}, false));
    StrategySummary b = summarize(backtest(fit_nrd, OddsSource::bet365, {}, false));
    StrategySummary c = summarize(backtest(fit_pm, OddsSource::bet365, {}, true));
    StrategySummary d = summarize(backtest(fit_nrd, OddsSource::bet365, {}, true));
    TableData t = strategy_table({&a, &b, &c, &d},
                                 {"full model", "no rank distance", "full model excl.",
                                  "no rank distance excl."});
    if (!excl_note.empty()) t.footnotes.push_back(excl_note);
    emit.table(std::move(t), "bet365_strategy", "Bet365 betting results, test window");
  }

  // Competitiveness bands
  std::vector<Interval> comp = parse_intervals(cfg.competitive);
  std::vector<Interval> tight = parse_intervals(cfg.tight);
  {
    BetLedger comp_pm = backtest(fit_pm, OddsSource::bet365, comp, false);
    BetLedger comp_pm_x = backtest(fit_pm, OddsSource::bet365, comp, true);
    BetLedger tight_pm = backtest(fit_pm, OddsSource::bet365, tight, false);
    BetLedger tight_pm_x = backtest(fit_pm, OddsSource::bet365, tight, true);
    StrategySummary a = summarize(comp_pm), b = summarize(comp_pm_x), c = summarize(tight_pm),
                    d = summarize(tight_pm_x);
    TableData t = strategy_table(
        {&a, &b, &c, &d},
        {intervals_text(comp), intervals_text(comp) + " excl.", intervals_text(tight),
         intervals_text(tight) + " excl."});
    if (!excl_note.empty()) t.footnotes.push_back(excl_note);
    const BetLedger* ledgers[] = {&comp_pm, &comp_pm_x, &tight_pm, &tight_pm_x};
    const char* labels[] = {"", " excl.", "", " excl."};
    const std::vector<Interval>* bands[] = {&comp, &comp, &tight, &tight};
    for (int i = 0; i < 4; ++i) {
      SignificanceResult r = random_strategy_pvalue(*ledgers[i], sig_cfg);
      t.footnotes.push_back("p (random >= real ROI), " + intervals_text(*bands[i]) +
                            std::string(labels[i]) + ": " + fmt(r.p_bs, 3) + " over " +
                            std::to_string(r.trials) + " trials, seed " + std::to_string(cfg.seed));
    }
    emit.table(std::move(t), "bet365_competitive", "Bet365 results by competitiveness band");
  }

  // Complement bands
  {
    std::vector<Interval> comp_c = complement_intervals(comp);
    std::vector<Interval> tight_c = complement_intervals(tight);
    BetLedger lc = backtest(fit_pm, OddsSource::bet365, comp_c, false);
    BetLedger lt = backtest(fit_pm, OddsSource::bet365, tight_c, false);
    StrategySummary a = summarize(lc), b = summarize(lt);
    TableData t = strategy_table({&a, &b}, {intervals_text(comp_c), intervals_text(tight_c)});
    for (const auto* led : {&lc, &lt}) {
      SignificanceResult r = random_strategy_pvalue(*led, sig_cfg);
      t.footnotes.push_back("p (random >= real ROI), " + intervals_text(led->config.competitiveness) +
                            ": " + fmt(r.p_bs, 3) + " over " + std::to_string(r.trials) +
                            " trials, seed " + std::to_string(cfg.seed));
    }
    emit.table(std::move(t), "bet365_competitive_complements",
               "Bet365 results outside the competitiveness bands");
  }

  // Best odds
  {
    StrategySummary a = summarize(backtest(fit_pm, OddsSource::market_best, {}, false));
    StrategySummary b = summarize(backtest(fit_pm, OddsSource::market_best, {}, true));
    TableData t = strategy_table({&a, &b}, {"best odds", "best odds excl."});
    if (!excl_note.empty()) t.footnotes.push_back(excl_note);
    emit.table(std::move(t), "best_odds_strategy", "Best-quoted-odds betting results, test window");
  }

  emit.table(std::move(t_clean), "cleaning_report", "Dataset cleaning audit");

  // Late-window refit
  if (cfg.extended_end) {
    Date late_lo = cfg.late_start.value_or(cfg.train_end + 1);
    std::vector<PlayerMatchRow> late;
    for (const auto& r : built.rows)
      if (r.date >= late_lo && r.date <= *cfg.extended_end) late.push_back(r);
    if (late.empty()) raise(Errc::empty_split, "no rows in the late window");
    RegressionFit fit_late = estimate_model(build_design(late, Model::pm, cfg.fixed_effects));
    std::string label = cfg.late_label.empty()
                            ? late_lo.iso() + " .. " + cfg.extended_end->iso()
                            : cfg.late_label;
    emit.table(mispricing_table({&fit_late}, {label}, true), "extended_coefficients",
               "Late-window forecast error estimates");
  }

  // Figure: test-window P&L with and without the configured bets
  {
    BetLedger with = backtest(fit_pm, OddsSource::bet365, {}, false);
    std::vector<PlotSeries> series;
    series.push_back({"all bets", false, cumulative_series(with)});
    std::optional<Date> marker;
    if (!excluded_keys.empty()) {
      BetLedger without = backtest(fit_pm, OddsSource::bet365, {}, true);
      series.push_back({"configured bets removed", true, cumulative_series(without)});
      marker = cfg.excluded_bets.front().date;
    }
    PlotOptions opts;
    opts.title = "Cumulative profit, Bet365 test window";
    opts.marker = marker;
    emit.figure(series, opts, "pnl_outlier_effect");
  }

  // Figure: extended P&L under the original coefficients
  if (cfg.extended_end) {
    SplitResult wide = split_samples(built.rows, cfg.train_end, *cfg.extended_end, cfg.train_start);
    StrategyConfig sc;
    sc.model = Model::pm;
    sc.bet_odds = OddsSource::bet365;
    BetLedger led = run_backtest(fit_pm, wide.test, sc);
    PlotOptions opts;
    opts.title = "Cumulative profit, extended window";
    opts.marker = cfg.test_end;
    emit.figure({{"all bets", false, cumulative_series(led)}}, opts, "pnl_extended");
  }

  ReplicationRun run;
  run.config_digest = config_digest;
  run.dataset_fingerprint = dataset_fp;
  run.tool_version = kToolVersion;
  run.outputs = std::move(emit.outputs);
  write_file(out_dir + "/manifest.json", run.to_json());
  return run;
}

ReplicationRun replicate_all_file(const std::string& config_path, const std::string& out_dir) {
  std::string text = read_file(config_path);
  ReplicationConfig cfg = ReplicationConfig::from_json(text);
  return replicate_all(cfg, hex16(fnv1a64(text)), out_dir);
}

std::string ReplicationRun::to_json() const {
  ordered_json j;
  j["kind"] = "replication_run";
  j["tool_version"] = tool_version;
  j["config_digest"] = config_digest;
  j["dataset_fingerprint"] = dataset_fingerprint;
  ordered_json outs = ordered_json::array();
  for (const auto& o : outputs) {
    ordered_json e;
    e["name"] = o.name;
    e["kind"] = o.kind;
    e["files"] = o.files;
    e["fingerprint"] = o.fingerprint;
    outs.push_back(std::move(e));
  }
  j["outputs"] = std::move(outs);
  return j.dump(2) + "\n";
}

}  // namespace buzz

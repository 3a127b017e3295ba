#pragma once

#include <optional>
#include <string>
#include <vector>

namespace buzz {

// Layout-free table payload shared by the estimators, the backtester and the
// renderer. Cells keep both the display string and, when numeric, the value,
// so downstream checks never reparse formatted text.
struct TableCell {
  std::string text;
  std::optional<double> value;

  TableCell() = default;
  TableCell(std::string t) : text(std::move(t)) {}
  TableCell(std::string t, double v) : text(std::move(t)), value(v) {}
};

struct TableData {
  std::string id;      // stable artifact name, e.g. "insample_coefficients"
  std::string layout;  // renderer dispatch: coefficients, strategy, cleaning, significance
  std::string title;   // one line shown above the rendered table
  std::vector<std::string> col_labels;
  std::vector<std::string> row_labels;
  std::vector<std::vector<TableCell>> cells;  // row major, ragged rows padded on render
  std::vector<std::string> footnotes;
};

}  // namespace buzz

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "types.hpp"

namespace buzz {

// --- scalar features ---------------------------------------------------

// z = 1/odds, the bookmaker's implied win probability with the margin left
// in. Decimal odds below 1 are impossible quotes.
double implied_probability(double odds);

// K = z_i + z_j - 1, the bookmaker margin on one match.
double overround(double z_i, double z_j);

// -(1/rank_i - 1/rank_j) on inverted rankings, unranked counted as 0.
// Negative when side i is the stronger player.
double rank_distance(std::optional<int> rank_i, std::optional<int> rank_j);

// ln(w_i/med_i) - ln(w_j/med_j): difference in log attention shocks the day
// before the match. All four inputs must be positive.
double wikibuzz(double w_i, double med_i, double w_j, double med_j);

// e = y - z.
double forecast_error(int y, double z);

// --- design matrix ------------------------------------------------------

enum class Model { pm, pm_no_rd };

const char* model_name(Model m);
std::optional<Model> model_from_name(std::string_view name);

enum class FeKind { season, tournament };

const char* fe_kind_name(FeKind k);
std::optional<FeKind> fe_kind_from_name(std::string_view name);

struct FeBlock {
  FeKind kind;
  std::vector<std::string> levels;  // sorted; levels[0] is the dropped reference
  std::vector<long> counts;         // rows per level, aligned with levels
  int col0 = 0;                     // column of the first dummy (levels[1])
};

struct DesignMatrix {
  Model model = Model::pm;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;  // forecast errors
  std::vector<std::string> colnames;
  int k_report = 0;  // leading columns reported: const, z, [rank_dist], wikibuzz
  std::vector<FeBlock> fe_blocks;
  std::vector<int> cluster_tournament;  // dense group id per row
  std::vector<int> cluster_match;
  int g_tournament = 0;
  int g_match = 0;
  std::vector<std::string> notes;  // e.g. a dropped collinear block

  long n() const { return long(X.rows()); }
  int k() const { return int(X.cols()); }
};

// Builds [const | z | rank_dist? | wikibuzz | fixed effect dummies] with the
// forecast error as response. A fixed effect whose levels are constant inside
// another requested block is collinear by construction and gets dropped with
// a note rather than poisoning the solve.
DesignMatrix build_design(const std::vector<PlayerMatchRow>& rows, Model model,
                          std::vector<FeKind> fe = {FeKind::tournament});

}  // namespace buzz

#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "types.hpp"

namespace buzz {

struct AnomalyFlag {
  std::string row_key;  // match_id:w or match_id:l
  std::string kind;     // SingleBookAboveBest, BestOddsOutlier, MissingOdds, YoungProfile
  std::string detail;
};

struct CleaningStep {
  std::string name;
  long rows_before = 0;
  long rows_removed = 0;
  std::vector<std::string> exemplars;  // up to a handful of removed-match descriptions
};

struct CleaningReport {
  std::vector<CleaningStep> steps;
  std::optional<double> sigma_used;
  long rows_final = 0;
  long matches_final = 0;
  long players_final = 0;

  std::string to_json() const;
};

struct StepResult {
  Dataset kept;
  long rows_removed = 0;  // directed rows, 2 per removed match
  std::vector<AnomalyFlag> flags;
};

// Step 1: drop matches where either player's first pageview day is under a
// year and a day before the match (or is unknown).
StepResult filter_new_players(const Dataset& ds);

// Step 2: drop matches where the single bookmaker quotes strictly above the
// best market quote on the same side. Missing values pass through.
StepResult filter_bet365_above_best(const Dataset& ds);

// Step 3: drop matches missing any of the three odds sources on either side.
StepResult filter_missing(const Dataset& ds);

// Step 4: per side d = |1/best - 1/avg|; drop matches where d strays more
// than 4 sigma from the mean d. With sigma unset both mean and sigma come
// from the input itself (the rows that survived steps 1-3).
StepResult filter_best_odds_outliers(const Dataset& ds, std::optional<double> sigma,
                                     double* sigma_used);

struct CleanOptions {
  std::optional<double> sigma;  // pin step-4 sigma instead of estimating it
  std::set<int> skip_steps;     // 1-based step numbers to skip
};

struct CleanResult {
  Dataset dataset;
  CleaningReport report;
  std::vector<AnomalyFlag> flags;
};

// Steps applied in the fixed order 1->4. Rerunning on its own output removes
// nothing further (sigma pinned to the first run's estimate makes that exact).
CleanResult run_pipeline(const Dataset& ds, const CleanOptions& opts = {});

// Drops whole matches by id; unknown ids are an error, not a no-op.
Dataset exclude_rows(const Dataset& ds, const std::vector<std::string>& match_ids);

// Non-destructive scan: every flag the four filters would raise, without
// removing anything. Used for audits and for locating erroneous quotes.
std::vector<AnomalyFlag> scan_anomalies(const Dataset& ds, std::optional<double> sigma = {});

}  // namespace buzz

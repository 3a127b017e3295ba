#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "features.hpp"
#include "table.hpp"
#include "types.hpp"

namespace buzz {

struct OlsSolution {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
  Eigen::VectorXd fitted;
  // Inverse of X'X recovered from the pivoted QR factor, reused by the
  // covariance sandwich.
  Eigen::MatrixXd xtx_inv;
};

// Least squares through a column pivoted Householder QR. Exact collinearity
// raises Errc::rank_deficient naming the redundant columns instead of
// returning arbitrary coefficients.
OlsSolution fit_ols(const DesignMatrix& d);

struct ClusterCovariance {
  Eigen::MatrixXd v;  // full k x k, after symmetrizing and eigenvalue clipping
  int g_tournament = 0;
  int g_match = 0;
  int g_intersection = 0;
  int df = 0;                   // min(g) - 1, used for the t reference
  double clipped_mass = 0;      // magnitude of negative eigenvalues removed
  bool degenerate_pair = false; // intersection equals one of the groupings
};

// Two way cluster robust covariance: sandwich per grouping, combined by
// inclusion-exclusion, each term with the usual small sample scaling
// G/(G-1) * (N-1)/(N-K). The combined matrix need not be positive
// semidefinite, so negative eigenvalues are clipped to zero.
ClusterCovariance cluster_covariance(const DesignMatrix& d, const OlsSolution& ols);

struct Coefficient {
  std::string name;
  double estimate = 0;
  double se = 0;
  double t_stat = 0;
  double p_value = 0;
};

struct RegressionFit {
  Model model = Model::pm;
  std::vector<std::string> fixed_effects;
  std::vector<Coefficient> coefficients;  // const, z, [rank_dist], wikibuzz
  Eigen::MatrixXd covariance;             // over those reported coefficients
  std::map<std::string, double> fe_estimates;  // centered level effects
  long n_rows = 0;
  int g_tournament = 0;
  int g_match = 0;
  int df = 0;
  double residual_sd = 0;
  std::vector<std::string> notes;

  const Coefficient* find(const std::string& name) const;
  double coef(const std::string& name) const;  // 0 when the term is absent

  // Outcome probability implied by the fitted error model:
  //   y_tilde = const + (1 + beta_z) z + beta_rd rank_dist + beta_wb wikibuzz
  // Fixed effects are centered to mean zero and enter through the constant.
  double predict(const PlayerMatchRow& row) const;

  std::string to_json() const;
  static RegressionFit from_json(const std::string& text);
};

// Full pipeline on a prepared design: solve, cluster the covariance, then
// reparameterize so the constant is the grand intercept (fixed effects sum
// to zero weighted by level size) with a delta method standard error.
RegressionFit estimate_model(const DesignMatrix& d);

// Side by side coefficient comparison of several fits sharing a response.
TableData mispricing_table(const std::vector<const RegressionFit*>& fits,
                           const std::vector<std::string>& labels, bool with_pvalues = false);

}  // namespace buzz

#include "estimate.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <json.hpp>
#include <set>

#include "errors.hpp"

namespace buzz {

using ordered_json = nlohmann::ordered_json;

OlsSolution fit_ols(const DesignMatrix& d) {
  const long n = d.n();
  const int k = d.k();
  if (n <= k)
    raise(Errc::not_enough_rows, std::to_string(n) + " rows cannot identify " + std::to_string(k) +
                                     " parameters");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
  const int rank = int(qr.rank());
  if (rank < k) {
    // Pivoting pushes the dependent columns to the back of the permutation.
    const auto& perm = qr.colsPermutation().indices();
    std::string cols;
    for (int i = rank; i < k; ++i) {
      if (!cols.empty()) cols += ", ";
      cols += d.colnames[size_t(perm(i))];
    }
    raise(Errc::rank_deficient, "design rank " + std::to_string(rank) + " < " +
                                    std::to_string(k) + "; redundant columns: " + cols);
  }

  OlsSolution s;
  s.beta = qr.solve(d.y);
  s.fitted = d.X * s.beta;
  s.residuals = d.y - s.fitted;

  // (X'X)^-1 = P R^-1 R^-T P' from X P = Q R.
  Eigen::MatrixXd rinv = qr.matrixR()
                             .topLeftCorner(k, k)
                             .triangularView<Eigen::Upper>()
                             .solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::MatrixXd inner = rinv * rinv.transpose();
  const auto& p = qr.colsPermutation();
  s.xtx_inv = p * inner * p.transpose();
  return s;
}

namespace {

Eigen::MatrixXd cluster_meat(const Eigen::MatrixXd& x, const Eigen::VectorXd& u,
                             const std::vector<int>& gid, int g) {
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(x.cols(), g);
  for (long i = 0; i < x.rows(); ++i) scores.col(gid[size_t(i)]) += u(i) * x.row(i).transpose();
  return scores * scores.transpose();
}

double cr1_scale(long n, int k, int g) {
  return (double(g) / (g - 1.0)) * ((n - 1.0) / double(n - k));
}

}  // namespace

ClusterCovariance cluster_covariance(const DesignMatrix& d, const OlsSolution& ols) {
  const long n = d.n();
  const int k = d.k();
  if (d.g_tournament < 2 || d.g_match < 2)
    raise(Errc::single_cluster, "need at least two clusters in every dimension, got " +
                                    std::to_string(d.g_tournament) + " tournament and " +
                                    std::to_string(d.g_match) + " match clusters");

  // Dense ids for the pairwise intersection grouping.
  std::vector<int> inter(static_cast<size_t>(n));
  std::map<std::pair<int, int>, int> inter_ids;
  for (long i = 0; i < n; ++i) {
    auto key = std::make_pair(d.cluster_tournament[size_t(i)], d.cluster_match[size_t(i)]);
    auto [it, _] = inter_ids.emplace(key, int(inter_ids.size()));
    inter[size_t(i)] = it->second;
  }
  const int g_int = int(inter_ids.size());

  auto sandwich = [&](const std::vector<int>& gid, int g) -> Eigen::MatrixXd {
    Eigen::MatrixXd meat = cluster_meat(d.X, ols.residuals, gid, g);
    return cr1_scale(n, k, g) * ols.xtx_inv * meat * ols.xtx_inv;
  };

  ClusterCovariance out;
  out.g_tournament = d.g_tournament;
  out.g_match = d.g_match;
  out.g_intersection = g_int;
  // The intersection refining a grouping to the same class count means the
  // partitions are identical and two terms cancel exactly.
  out.degenerate_pair = (g_int == d.g_tournament) || (g_int == d.g_match);

  Eigen::MatrixXd v = sandwich(d.cluster_tournament, d.g_tournament) +
                      sandwich(d.cluster_match, d.g_match) - sandwich(inter, g_int);
  v = ((v + v.transpose()) / 2.0).eval();

  // Inclusion-exclusion can leave the matrix indefinite; clip the spectrum.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(v);
  Eigen::VectorXd lam = eig.eigenvalues();
  double clipped = 0;
  for (int i = 0; i < lam.size(); ++i)
    if (lam(i) < 0) {
      clipped += -lam(i);
      lam(i) = 0;
    }
  out.clipped_mass = clipped;
  out.v = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
  out.df = std::min(d.g_tournament, d.g_match) - 1;
  return out;
}

const Coefficient* RegressionFit::find(const std::string& name) const {
  for (const auto& c : coefficients)
    if (c.name == name) return &c;
  return nullptr;
}

double RegressionFit::coef(const std::string& name) const {
  const Coefficient* c = find(name);
  return c ? c->estimate : 0.0;
}

double RegressionFit::predict(const PlayerMatchRow& row) const {
  return coef("const") + (1.0 + coef("z")) * row.z + coef("rank_dist") * row.rank_dist +
         coef("wikibuzz") * row.wikibuzz;
}

RegressionFit estimate_model(const DesignMatrix& d) {
  OlsSolution ols = fit_ols(d);
  ClusterCovariance cc = cluster_covariance(d, ols);

  const int k = d.k();
  const long n = d.n();
  const int kr = d.k_report;

  // Reparameterize: const' = const + sum over blocks of the size weighted
  // mean of level effects, so the constant is the grand intercept and level
  // effects are centered. Slope rows pass through unchanged.
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(kr, k);
  t(0, 0) = 1.0;
  for (const auto& block : d.fe_blocks) {
    for (size_t l = 1; l < block.levels.size(); ++l)
      t(0, block.col0 + int(l) - 1) = double(block.counts[l]) / double(n);
  }
  for (int j = 1; j < kr; ++j) t(j, j) = 1.0;

  RegressionFit fit;
  fit.model = d.model;
  for (const auto& b : d.fe_blocks) fit.fixed_effects.push_back(fe_kind_name(b.kind));
  fit.n_rows = n;
  fit.g_tournament = cc.g_tournament;
  fit.g_match = cc.g_match;
  fit.df = cc.df;
  fit.residual_sd = std::sqrt(ols.residuals.squaredNorm() / double(n - k));
  fit.notes = d.notes;
  if (cc.clipped_mass > 0)
    fit.notes.push_back("covariance spectrum clipped by " + std::to_string(cc.clipped_mass));

  Eigen::VectorXd est = t * ols.beta;
  fit.covariance = t * cc.v * t.transpose();

  boost::math::students_t tdist(double(cc.df));
  for (int j = 0; j < kr; ++j) {
    Coefficient c;
    c.name = d.colnames[size_t(j)];
    c.estimate = est(j);
    double var = fit.covariance(j, j);
    c.se = var > 0 ? std::sqrt(var) : 0.0;
    if (c.se > 0) {
      c.t_stat = c.estimate / c.se;
      c.p_value = 2.0 * boost::math::cdf(boost::math::complement(tdist, std::fabs(c.t_stat)));
    } else {
      c.t_stat = 0;
      c.p_value = c.estimate == 0 ? 1.0 : 0.0;
    }
    fit.coefficients.push_back(std::move(c));
  }

  for (const auto& block : d.fe_blocks) {
    double wmean = 0;
    for (size_t l = 1; l < block.levels.size(); ++l)
      wmean += (double(block.counts[l]) / double(n)) * ols.beta(block.col0 + int(l) - 1);
    for (size_t l = 0; l < block.levels.size(); ++l) {
      double raw = l == 0 ? 0.0 : ols.beta(block.col0 + int(l) - 1);
      fit.fe_estimates[std::string(fe_kind_name(block.kind)) + ":" + block.levels[l]] =
          raw - wmean;
    }
  }
  return fit;
}

std::string RegressionFit::to_json() const {
  ordered_json j;
  j["kind"] = "regression_fit";
  j["version"] = 1;
  j["model"] = model_name(model);
  j["fixed_effects"] = fixed_effects;
  j["n_rows"] = n_rows;
  j["clusters"] = {{"tournament", g_tournament}, {"match", g_match}};
  j["df"] = df;
  j["residual_sd"] = residual_sd;
  ordered_json coefs = ordered_json::array();
  for (const auto& c : coefficients)
    coefs.push_back({{"name", c.name},
                     {"estimate", c.estimate},
                     {"se", c.se},
                     {"t", c.t_stat},
                     {"p", c.p_value}});
  j["coefficients"] = std::move(coefs);
  ordered_json cov = ordered_json::array();
  for (int r = 0; r < covariance.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < covariance.cols(); ++c) row.push_back(covariance(r, c));
    cov.push_back(std::move(row));
  }
  j["covariance"] = std::move(cov);
  j["fe_estimates"] = fe_estimates;
  j["notes"] = notes;
  return j.dump(2);
}

RegressionFit RegressionFit::from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded() || j.value("kind", "") != "regression_fit")
    raise(Errc::parse, "not a regression fit artifact");

  RegressionFit fit;
  auto model = model_from_name(j.value("model", ""));
  if (!model) raise(Errc::parse, "unknown model in fit artifact");
  fit.model = *model;
  fit.fixed_effects = j.value("fixed_effects", std::vector<std::string>{});
  fit.n_rows = j.value("n_rows", 0L);
  if (j.contains("clusters")) {
    fit.g_tournament = j["clusters"].value("tournament", 0);
    fit.g_match = j["clusters"].value("match", 0);
  }
  fit.df = j.value("df", 0);
  fit.residual_sd = j.value("residual_sd", 0.0);
  for (const auto& c : j.value("coefficients", ordered_json::array())) {
    Coefficient coef;
    coef.name = c.value("name", "");
    coef.estimate = c.value("estimate", 0.0);
    coef.se = c.value("se", 0.0);
    coef.t_stat = c.value("t", 0.0);
    coef.p_value = c.value("p", 0.0);
    fit.coefficients.push_back(std::move(coef));
  }
  if (j.contains("covariance")) {
    const auto& cov = j["covariance"];
    int k = int(cov.size());
    fit.covariance = Eigen::MatrixXd::Zero(k, k);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) fit.covariance(r, c) = cov[size_t(r)][size_t(c)].get<double>();
  }
  if (j.contains("fe_estimates"))
    fit.fe_estimates = j["fe_estimates"].get<std::map<std::string, double>>();
  fit.notes = j.value("notes", std::vector<std::string>{});
  return fit;
}

TableData mispricing_table(const std::vector<const RegressionFit*>& fits,
                           const std::vector<std::string>& labels, bool with_pvalues) {
  if (fits.empty() || fits.size() != labels.size())
    raise(Errc::invalid_argument, "need one label per fit");

  static const std::vector<std::pair<std::string, std::string>> display_order = {
      {"z", "implied probability"},
      {"rank_dist", "rank distance"},
      {"wikibuzz", "wikibuzz"},
      {"const", "constant"},
  };

  char buf[64];
  auto fmt = [&](double v, const char* pattern) {
    std::snprintf(buf, sizeof(buf), pattern, v);
    return std::string(buf);
  };

  TableData t;
  t.id = "coefficients";
  t.layout = "coefficients";
  t.title = "Forecast error regressions";

  if (with_pvalues && fits.size() == 1) {
    const RegressionFit& f = *fits[0];
    t.col_labels = {"estimate", "se", "p-value"};
    for (const auto& [name, label] : display_order) {
      const Coefficient* c = f.find(name);
      if (!c) continue;
      t.row_labels.push_back(label);
      t.cells.push_back({TableCell(fmt(c->estimate, "%.3f"), c->estimate),
                         TableCell("(" + fmt(c->se, "%.3f") + ")", c->se),
                         TableCell(fmt(c->p_value, "%.3f"), c->p_value)});
    }
    t.row_labels.push_back("n rows");
    t.cells.push_back({TableCell(std::to_string(f.n_rows), double(f.n_rows))});
    t.footnotes.push_back(labels[0]);
  } else {
    t.col_labels = labels;
    for (const auto& [name, label] : display_order) {
      bool any = false;
      for (const auto* f : fits) any = any || f->find(name);
      if (!any) continue;
      std::vector<TableCell> est_row, se_row;
      for (const auto* f : fits) {
        const Coefficient* c = f->find(name);
        if (c) {
          est_row.push_back(TableCell(fmt(c->estimate, "%.3f"), c->estimate));
          se_row.push_back(TableCell("(" + fmt(c->se, "%.3f") + ")", c->se));
        } else {
          est_row.push_back(TableCell(""));
          se_row.push_back(TableCell(""));
        }
      }
      t.row_labels.push_back(label);
      t.cells.push_back(std::move(est_row));
      t.row_labels.push_back("");
      t.cells.push_back(std::move(se_row));
    }
    std::vector<TableCell> n_row;
    for (const auto* f : fits) n_row.push_back(TableCell(std::to_string(f->n_rows), double(f->n_rows)));
    t.row_labels.push_back("n rows");
    t.cells.push_back(std::move(n_row));
  }
  t.footnotes.push_back("standard errors two-way clustered by tournament and match");
  return t;
}

}  // namespace buzz

#include "features.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "errors.hpp"

namespace buzz {

double implied_probability(double odds) {
  if (!(odds >= 1.0))
    raise(Errc::bad_odds, "decimal odds must be >= 1, got " + std::to_string(odds));
  return 1.0 / odds;
}

double overround(double z_i, double z_j) { return z_i + z_j - 1.0; }

double rank_distance(std::optional<int> rank_i, std::optional<int> rank_j) {
  auto inv = [](std::optional<int> r) -> double {
    if (!r) return 0.0;
    if (*r <= 0) raise(Errc::invalid_argument, "rank must be positive, got " + std::to_string(*r));
    return 1.0 / double(*r);
  };
  return -(inv(rank_i) - inv(rank_j));
}

double wikibuzz(double w_i, double med_i, double w_j, double med_j) {
  if (!(w_i > 0) || !(med_i > 0) || !(w_j > 0) || !(med_j > 0))
    raise(Errc::non_positive_input, "attention inputs must all be positive");
  return std::log(w_i / med_i) - std::log(w_j / med_j);
}

double forecast_error(int y, double z) { return double(y) - z; }

const char* model_name(Model m) { return m == Model::pm ? "pm" : "pm-no-rd"; }

std::optional<Model> model_from_name(std::string_view name) {
  if (name == "pm") return Model::pm;
  if (name == "pm-no-rd" || name == "pm_no_rd") return Model::pm_no_rd;
  return std::nullopt;
}

const char* fe_kind_name(FeKind k) { return k == FeKind::season ? "season" : "tournament"; }

std::optional<FeKind> fe_kind_from_name(std::string_view name) {
  if (name == "season") return FeKind::season;
  if (name == "tournament") return FeKind::tournament;
  return std::nullopt;
}

namespace {

std::string fe_level_of(const PlayerMatchRow& r, FeKind k) {
  return k == FeKind::season ? std::to_string(r.season) : r.tournament_key;
}

// True when every level of `inner` maps to a single level of `outer`, which
// makes the inner dummies a linear combination of the outer ones plus the
// intercept.
bool nested_within(const std::vector<PlayerMatchRow>& rows, FeKind inner, FeKind outer) {
  std::map<std::string, std::string> seen;
  for (const auto& r : rows) {
    std::string o = fe_level_of(r, outer);
    auto [it, inserted] = seen.emplace(o, fe_level_of(r, inner));
    if (!inserted && it->second != fe_level_of(r, inner)) return false;
  }
  return true;
}

}  // namespace

DesignMatrix build_design(const std::vector<PlayerMatchRow>& rows, Model model,
                          std::vector<FeKind> fe) {
  if (rows.empty()) raise(Errc::not_enough_rows, "no rows to build a design from");

  DesignMatrix d;
  d.model = model;

  // Drop any fixed effect that is constant within the levels of another one;
  // keeping it would make the design exactly singular.
  std::sort(fe.begin(), fe.end());
  fe.erase(std::unique(fe.begin(), fe.end()), fe.end());
  for (auto it = fe.begin(); it != fe.end();) {
    bool absorbed = false;
    for (FeKind outer : fe) {
      if (outer == *it) continue;
      if (nested_within(rows, *it, outer)) {
        d.notes.push_back(std::string(fe_kind_name(*it)) + " effects are constant within " +
                          fe_kind_name(outer) + " levels; block dropped as collinear");
        absorbed = true;
        break;
      }
    }
    it = absorbed ? fe.erase(it) : ++it;
  }

  const bool with_rd = (model == Model::pm);
  d.k_report = with_rd ? 4 : 3;

  d.colnames = {"const", "z"};
  if (with_rd) d.colnames.push_back("rank_dist");
  d.colnames.push_back("wikibuzz");

  // Collect fixed effect levels and their row counts.
  for (FeKind k : fe) {
    std::map<std::string, long> counts;
    for (const auto& r : rows) ++counts[fe_level_of(r, k)];
    FeBlock block;
    block.kind = k;
    for (const auto& [level, n] : counts) {
      block.levels.push_back(level);
      block.counts.push_back(n);
    }
    block.col0 = int(d.colnames.size());
    for (size_t i = 1; i < block.levels.size(); ++i)
      d.colnames.push_back(std::string(fe_kind_name(k)) + ":" + block.levels[i]);
    d.fe_blocks.push_back(std::move(block));
  }

  const long n = long(rows.size());
  const int k = int(d.colnames.size());
  d.X = Eigen::MatrixXd::Zero(n, k);
  d.y = Eigen::VectorXd(n);

  std::map<std::string, int> tid, mid;
  d.cluster_tournament.resize(size_t(n));
  d.cluster_match.resize(size_t(n));

  for (long i = 0; i < n; ++i) {
    const auto& r = rows[size_t(i)];
    int c = 0;
    d.X(i, c++) = 1.0;
    d.X(i, c++) = r.z;
    if (with_rd) d.X(i, c++) = r.rank_dist;
    d.X(i, c++) = r.wikibuzz;
    d.y(i) = r.e;

    for (const auto& block : d.fe_blocks) {
      std::string level = fe_level_of(r, block.kind);
      auto it = std::lower_bound(block.levels.begin(), block.levels.end(), level);
      size_t idx = size_t(it - block.levels.begin());
      if (idx > 0) d.X(i, block.col0 + int(idx) - 1) = 1.0;
    }

    auto tit = tid.emplace(r.tournament_key, int(tid.size()));
    d.cluster_tournament[size_t(i)] = tit.first->second;
    auto mit = mid.emplace(r.match_id, int(mid.size()));
    d.cluster_match[size_t(i)] = mit.first->second;
  }
  d.g_tournament = int(tid.size());
  d.g_match = int(mid.size());
  return d;
}

}  // namespace buzz

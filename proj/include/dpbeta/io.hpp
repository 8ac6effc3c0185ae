//
// Copyright 2026 The dpbeta Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPBETA_IO_HPP_
#define DPBETA_IO_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dpbeta/estimator.hpp"
#include "dpbeta/inference.hpp"
#include "dpbeta/network.hpp"
#include "dpbeta/release.hpp"
#include "dpbeta/simulation.hpp"

namespace dpbeta {

using Json = nlohmann::ordered_json;

// Malformed or inconsistent input files. Distinct from usage errors so the
// CLI can map it to its own exit code.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Dataset ingestion
// ---------------------------------------------------------------------------

enum class CovariateRule {
  kNone,
  kMatch,    // z_ijk = +1 if attribute k agrees, -1 otherwise
  kProduct,  // z_ijk = x_ik * x_jk for numeric attributes
};

inline CovariateRule covariate_rule_from_string(const std::string& s) {
  if (s == "none") return CovariateRule::kNone;
  if (s == "match") return CovariateRule::kMatch;
  if (s == "product") return CovariateRule::kProduct;
  throw std::invalid_argument("unknown covariate rule '" + s + "'");
}

struct DatasetSpec {
  std::string edge_file;
  std::optional<std::string> attr_file;
  CovariateRule covariate_rule = CovariateRule::kNone;
  bool drop_isolated = false;
  bool zero_indexed = false;
  std::optional<int> num_nodes;  // default: largest id in the edge file
};

struct LoadedNetwork {
  Network network;
  std::vector<std::int64_t> labels;  // original node id of each row, as given
  std::vector<std::string> covariate_names;
  int self_loops_dropped = 0;
  int duplicate_edges = 0;
  int isolated_dropped = 0;
};

namespace internal {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

inline std::optional<std::int64_t> parse_int(const std::string& s) {
  std::size_t pos = 0;
  try {
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline std::optional<double> parse_double(const std::string& s) {
  std::size_t pos = 0;
  try {
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

inline bool skip_line(const std::string& line) {
  const auto b = line.find_first_not_of(" \t\r");
  return b == std::string::npos || line[b] == '#' || line[b] == '%';
}

}  // namespace internal

// Reads an edge list and optional attribute table into a simple undirected
// graph. Multi-edges collapse, self-loops are dropped and counted. When
// drop_isolated is set, zero-degree nodes are removed and `labels` maps each
// remaining row back to its original id.
inline LoadedNetwork load_network(const DatasetSpec& spec) {
  const std::int64_t offset = spec.zero_indexed ? 0 : 1;
  LoadedNetwork out;

  std::vector<std::pair<std::int64_t, std::int64_t>> raw;
  {
    auto in = internal::open_input(spec.edge_file);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (internal::skip_line(line)) continue;
      const auto fields = internal::split_fields(line);
      std::optional<std::int64_t> u, v;
      if (fields.size() >= 2) {
        u = internal::parse_int(fields[0]);
        v = internal::parse_int(fields[1]);
      }
      if (!u || !v) {
        throw DataError(spec.edge_file + ":" + std::to_string(lineno) +
                        ": malformed edge line '" + line + "'");
      }
      if (*u - offset < 0 || *v - offset < 0) {
        throw DataError(spec.edge_file + ":" + std::to_string(lineno) +
                        ": node id below the first index (" +
                        (spec.zero_indexed ? "0" : "1") +
                        "); check --zero-indexed");
      }
      raw.emplace_back(*u - offset, *v - offset);
    }
  }

  std::int64_t n = 0;
  for (auto [u, v] : raw) n = std::max({n, u + 1, v + 1});
  if (spec.num_nodes) {
    if (*spec.num_nodes < n) {
      throw DataError("edge file references node ids beyond --nodes");
    }
    n = *spec.num_nodes;
  }
  if (n > 200000) throw DataError("node count " + std::to_string(n) + " too large");

  // Attributes: header row, then `id, attr1, attr2, ...`.
  std::vector<std::vector<std::string>> attrs;
  if (spec.covariate_rule != CovariateRule::kNone) {
    if (!spec.attr_file) {
      throw DataError("covariate rule requires an attribute file");
    }
    auto in = internal::open_input(*spec.attr_file);
    std::string line;
    int lineno = 0;
    std::size_t width = 0;
    attrs.assign(static_cast<std::size_t>(n), {});
    while (std::getline(in, line)) {
      ++lineno;
      if (internal::skip_line(line)) continue;
      auto fields = internal::split_csv(line);
      if (width == 0) {
        if (fields.size() < 2) {
          throw DataError(*spec.attr_file + ":" + std::to_string(lineno) +
                          ": header needs an id column and at least one attribute");
        }
        width = fields.size();
        out.covariate_names.assign(fields.begin() + 1, fields.end());
        continue;
      }
      const auto id = internal::parse_int(fields[0]);
      if (fields.size() != width || !id) {
        throw DataError(*spec.attr_file + ":" + std::to_string(lineno) +
                        ": malformed attribute line '" + line + "'");
      }
      const std::int64_t node = *id - offset;
      if (node < 0 || node >= n) {
        throw DataError(*spec.attr_file + ":" + std::to_string(lineno) +
                        ": unknown node id " + fields[0]);
      }
      attrs[static_cast<std::size_t>(node)].assign(fields.begin() + 1, fields.end());
    }
    if (width == 0) throw DataError(*spec.attr_file + ": empty attribute file");
  }

  // Degrees on the full id range decide which nodes survive.
  std::vector<std::int64_t> deg(static_cast<std::size_t>(n), 0);
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;
  {
    std::vector<std::pair<std::int64_t, std::int64_t>> sorted;
    for (auto [u, v] : raw) {
      if (u == v) {
        ++out.self_loops_dropped;
        continue;
      }
      sorted.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t e = 0; e < sorted.size(); ++e) {
      if (e > 0 && sorted[e] == sorted[e - 1]) {
        ++out.duplicate_edges;
        continue;
      }
      edges.push_back(sorted[e]);
      ++deg[static_cast<std::size_t>(sorted[e].first)];
      ++deg[static_cast<std::size_t>(sorted[e].second)];
    }
  }

  std::vector<int> remap(static_cast<std::size_t>(n), -1);
  for (std::int64_t v = 0; v < n; ++v) {
    if (spec.drop_isolated && deg[static_cast<std::size_t>(v)] == 0) {
      ++out.isolated_dropped;
      continue;
    }
    remap[static_cast<std::size_t>(v)] = static_cast<int>(out.labels.size());
    out.labels.push_back(v + offset);
  }
  const int m = static_cast<int>(out.labels.size());

  PairCovariates cov = PairCovariates::empty(m);
  if (spec.covariate_rule != CovariateRule::kNone) {
    const int p = static_cast<int>(out.covariate_names.size());
    std::vector<std::vector<double>> numeric;
    for (int r = 0; r < m; ++r) {
      const auto& a = attrs[static_cast<std::size_t>(out.labels[static_cast<std::size_t>(r)] - offset)];
      if (a.empty()) {
        throw DataError("missing attributes for node " +
                        std::to_string(out.labels[static_cast<std::size_t>(r)]));
      }
      if (spec.covariate_rule == CovariateRule::kProduct) {
        std::vector<double> row;
        for (const auto& f : a) {
          const auto x = internal::parse_double(f);
          if (!x) {
            throw DataError("non-numeric attribute '" + f + "' for node " +
                            std::to_string(out.labels[static_cast<std::size_t>(r)]) +
                            " under the product rule");
          }
          row.push_back(*x);
        }
        numeric.push_back(std::move(row));
      }
    }
    auto node_attrs = [&](int r) -> const std::vector<std::string>& {
      return attrs[static_cast<std::size_t>(out.labels[static_cast<std::size_t>(r)] - offset)];
    };
    cov = PairCovariates::from_function(m, p, [&](int i, int j) {
      std::vector<double> z(static_cast<std::size_t>(p));
      for (int t = 0; t < p; ++t) {
        const auto ut = static_cast<std::size_t>(t);
        if (spec.covariate_rule == CovariateRule::kMatch) {
          z[ut] = node_attrs(i)[ut] == node_attrs(j)[ut] ? 1.0 : -1.0;
        } else {
          z[ut] = numeric[static_cast<std::size_t>(i)][ut] *
                  numeric[static_cast<std::size_t>(j)][ut];
        }
      }
      return z;
    });
  }

  std::vector<std::pair<int, int>> mapped;
  mapped.reserve(edges.size());
  for (auto [u, v] : edges) {
    mapped.emplace_back(remap[static_cast<std::size_t>(u)], remap[static_cast<std::size_t>(v)]);
  }
  out.network = Network::from_edges(std::move(cov), mapped);
  return out;
}

// min / q1 / median / q3 / max with linear interpolation between order
// statistics (the "type 7" definition).
struct FiveNumberSummary {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

inline double quantile_type7(std::vector<double> v, double prob) {
  if (v.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline FiveNumberSummary five_number_summary(const std::vector<double>& v) {
  return {quantile_type7(v, 0.0), quantile_type7(v, 0.25),
          quantile_type7(v, 0.5), quantile_type7(v, 0.75),
          quantile_type7(v, 1.0)};
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace internal {

inline Json vec_to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Json mat_to_json(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(std::move(row));
  }
  return a;
}

// NaN is written as null.
inline Json num_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline double num_or_nan(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline Vector json_to_vec(const Json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

inline Matrix json_to_mat(const Json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw DataError("ragged matrix in JSON");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw DataError(std::string("invalid ") + what + " JSON: " + e.what());
  }
}

}  // namespace internal

inline Json to_json(const ReleasedStats& r) {
  Json j;
  j["n"] = r.n;
  j["p"] = r.p;
  j["d_tilde"] = r.d_tilde;
  j["y_tilde"] = internal::vec_to_json(r.y_tilde);
  j["epsilon"] = r.budget ? Json(r.budget->epsilon) : Json(nullptr);
  j["k"] = r.budget ? Json(r.budget->k) : Json(nullptr);
  j["lambda1"] = r.lambda1;
  j["lambda2"] = r.lambda2;
  j["seed"] = r.seed ? Json(*r.seed) : Json(nullptr);
  return j;
}

inline ReleasedStats released_from_json(const Json& j) {
  return internal::guarded("released statistics", [&] {
    ReleasedStats r;
    r.n = j.at("n").get<int>();
    r.p = j.at("p").get<int>();
    r.d_tilde = j.at("d_tilde").get<std::vector<std::int64_t>>();
    r.y_tilde = internal::json_to_vec(j.at("y_tilde"));
    if (!j.at("epsilon").is_null()) {
      r.budget = PrivacyBudget{j.at("epsilon").get<double>(), j.at("k").get<int>()};
    }
    r.lambda1 = j.at("lambda1").get<double>();
    r.lambda2 = j.at("lambda2").get<double>();
    if (j.contains("seed") && !j["seed"].is_null()) r.seed = j["seed"].get<std::uint64_t>();
    if (static_cast<int>(r.d_tilde.size()) != r.n || r.y_tilde.size() != r.p) {
      throw DataError("released statistics: lengths disagree with n and p");
    }
    return r;
  });
}

inline Json to_json(const FitResult& f, bool include_V = false) {
  Json j;
  j["n"] = f.beta_hat.size();
  j["p"] = f.gamma_hat.size();
  j["exists"] = f.exists;
  j["status"] = std::string(to_string(f.status));
  j["beta_hat"] = internal::vec_to_json(f.beta_hat);
  j["gamma_hat"] = internal::vec_to_json(f.gamma_hat);
  j["inner_iters"] = f.inner_iters;
  j["outer_iters"] = f.outer_iters;
  j["residual_F"] = internal::num_or_null(f.residual_F);
  j["residual_Q"] = internal::num_or_null(f.residual_Q);
  if (f.exists) j["H"] = internal::mat_to_json(f.H);
  if (include_V && f.exists) j["V"] = internal::mat_to_json(f.V);
  return j;
}

inline FitResult fit_from_json(const Json& j) {
  return internal::guarded("fit result", [&] {
    FitResult f;
    f.exists = j.at("exists").get<bool>();
    f.status = fit_status_from_string(j.at("status").get<std::string>());
    f.beta_hat = internal::json_to_vec(j.at("beta_hat"));
    f.gamma_hat = internal::json_to_vec(j.at("gamma_hat"));
    f.inner_iters = j.at("inner_iters").get<int>();
    f.outer_iters = j.at("outer_iters").get<int>();
    f.residual_F = internal::num_or_nan(j.at("residual_F"));
    f.residual_Q = internal::num_or_nan(j.at("residual_Q"));
    if (j.contains("H")) f.H = internal::json_to_mat(j["H"]);
    if (j.contains("V")) f.V = internal::json_to_mat(j["V"]);
    return f;
  });
}

// Fills V (and H when absent) from the estimate and the covariates, for fit
// files written without matrices.
inline void complete_fit_matrices(FitResult& f, const PairCovariates& cov,
                                  bool use_S_approx = false) {
  if (!f.exists) return;
  if (f.beta_hat.size() != cov.n() || f.gamma_hat.size() != cov.p()) {
    throw DataError("fit result does not match the network dimensions");
  }
  const Jacobians J = jacobians(f.params(), cov);
  if (f.V.size() == 0) f.V = J.V;
  if (f.H.rows() != cov.p()) {
    auto H = H_from_jacobians(J, use_S_approx);
    if (!H) throw DataError("V is singular at the stored estimate");
    f.H = *H;
  }
}

inline Json to_json(const Interval& iv) {
  return Json{{"parameter", iv.label}, {"estimate", iv.estimate},
              {"lower", iv.lower},     {"upper", iv.upper},
              {"level", iv.level}};
}

inline Json to_json(const InferenceReport& r) {
  Json j;
  j["v_diag"] = internal::vec_to_json(r.v_diag);
  j["gamma_cov"] = internal::mat_to_json(r.gamma_cov);
  j["B_hat"] = internal::vec_to_json(r.B_hat);
  j["gamma_bc"] = internal::vec_to_json(r.gamma_bc);
  Json iv = Json::array();
  for (const auto& i : r.intervals) iv.push_back(to_json(i));
  j["intervals"] = std::move(iv);
  return j;
}

inline InferenceReport inference_from_json(const Json& j) {
  return internal::guarded("inference report", [&] {
    InferenceReport r;
    r.v_diag = internal::json_to_vec(j.at("v_diag"));
    r.gamma_cov = internal::json_to_mat(j.at("gamma_cov"));
    r.B_hat = internal::json_to_vec(j.at("B_hat"));
    r.gamma_bc = internal::json_to_vec(j.at("gamma_bc"));
    for (const auto& i : j.at("intervals")) {
      r.intervals.push_back({i.at("parameter").get<std::string>(),
                             i.at("estimate").get<double>(), i.at("lower").get<double>(),
                             i.at("upper").get<double>(), i.at("level").get<double>()});
    }
    return r;
  });
}

// ---------------------------------------------------------------------------
// Simulation designs and tables
// ---------------------------------------------------------------------------

inline EpsilonRule epsilon_rule_from_json(const Json& j) {
  if (j.is_number()) return EpsilonRule::custom(j.get<double>());
  const auto s = j.get<std::string>();
  if (s == "logn_n16") return EpsilonRule::logn_n16();
  if (s == "logn_n14") return EpsilonRule::logn_n14();
  if (s == "none") return EpsilonRule::none();
  if (auto v = internal::parse_double(s)) return EpsilonRule::custom(*v);
  throw DataError("unknown epsilon rule '" + s + "'");
}

inline Json to_json(const SimDesign& d) {
  Json j;
  j["n"] = d.n;
  j["c"] = d.c;
  j["epsilon_rule"] = d.epsilon_rule.kind == EpsilonRule::Kind::kCustom
                          ? Json(d.epsilon_rule.value)
                          : Json(to_string(d.epsilon_rule));
  j["k"] = d.k;
  j["gamma_star"] = internal::vec_to_json(d.gamma_star);
  j["replications"] = d.replications;
  j["seed"] = d.seed;
  Json pairs = Json::array();
  for (auto [a, b] : d.resolved_pairs()) pairs.push_back(Json::array({a + 1, b + 1}));
  j["pairs"] = std::move(pairs);
  j["fixed_covariates"] = d.fixed_covariates;
  j["level"] = d.inference.level;
  j["bias_correction"] = std::string(to_string(d.inference.correction));
  j["gamma_variance"] =
      d.inference.variance == GammaVariance::kInverseH ? "inverse_h" : "hbar_over_n";
  j["fit"] = Json{{"beta_tol", d.fit.beta_tol},
                  {"gamma_tol", d.fit.gamma_tol},
                  {"max_inner_iters", d.fit.max_inner_iters},
                  {"max_outer_iters", d.fit.max_outer_iters},
                  {"beta_divergence_bound", d.fit.beta_divergence_bound},
                  {"use_S_approx", d.fit.use_S_approx}};
  return j;
}

// Missing keys keep their defaults. Pairs are 1-based in files.
inline SimDesign design_from_json(const Json& j, SimDesign d = {}) {
  return internal::guarded("simulation design", [&] {
    if (j.contains("n")) d.n = j["n"].get<int>();
    if (j.contains("c")) d.c = j["c"].get<double>();
    if (j.contains("epsilon_rule")) d.epsilon_rule = epsilon_rule_from_json(j["epsilon_rule"]);
    if (j.contains("epsilon")) d.epsilon_rule = EpsilonRule::custom(j["epsilon"].get<double>());
    if (j.contains("k")) d.k = j["k"].get<int>();
    if (j.contains("gamma_star")) d.gamma_star = internal::json_to_vec(j["gamma_star"]);
    if (j.contains("replications")) d.replications = j["replications"].get<int>();
    if (j.contains("seed")) d.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("pairs")) {
      d.pairs.clear();
      for (const auto& pr : j["pairs"]) {
        d.pairs.emplace_back(pr.at(0).get<int>() - 1, pr.at(1).get<int>() - 1);
      }
    }
    if (j.contains("fixed_covariates")) d.fixed_covariates = j["fixed_covariates"].get<bool>();
    if (j.contains("threads")) d.threads = j["threads"].get<int>();
    if (j.contains("level")) d.inference.level = j["level"].get<double>();
    if (j.contains("bias_correction")) {
      const auto s = j["bias_correction"].get<std::string>();
      if (s == "first_order") {
        d.inference.correction = BiasCorrection::kFirstOrder;
      } else if (s == "second_order") {
        d.inference.correction = BiasCorrection::kSecondOrder;
      } else {
        throw DataError("unknown bias correction '" + s + "'");
      }
    }
    if (j.contains("gamma_variance")) {
      const auto s = j["gamma_variance"].get<std::string>();
      if (s == "inverse_h") {
        d.inference.variance = GammaVariance::kInverseH;
      } else if (s == "hbar_over_n") {
        d.inference.variance = GammaVariance::kHbarOverN;
      } else {
        throw DataError("unknown gamma variance '" + s + "'");
      }
    }
    if (j.contains("fit")) {
      const auto& f = j["fit"];
      if (f.contains("beta_tol")) d.fit.beta_tol = f["beta_tol"].get<double>();
      if (f.contains("gamma_tol")) d.fit.gamma_tol = f["gamma_tol"].get<double>();
      if (f.contains("max_inner_iters")) d.fit.max_inner_iters = f["max_inner_iters"].get<int>();
      if (f.contains("max_outer_iters")) d.fit.max_outer_iters = f["max_outer_iters"].get<int>();
      if (f.contains("beta_divergence_bound")) {
        d.fit.beta_divergence_bound = f["beta_divergence_bound"].get<double>();
      }
      if (f.contains("use_S_approx")) d.fit.use_S_approx = f["use_S_approx"].get<bool>();
    }
    return d;
  });
}

inline Json to_json(const SimTable& t) {
  Json j;
  j["n"] = t.n;
  j["c"] = t.c;
  j["epsilon_rule"] = t.epsilon_rule;
  j["epsilon"] = t.epsilon;
  j["k"] = t.k;
  j["replications"] = t.replications;
  j["existing"] = t.existing;
  j["nonexistence_pct"] = internal::num_or_null(t.nonexistence_pct);
  Json st = Json::object();
  for (const auto& [k, v] : t.status_counts) st[k] = v;
  j["status_counts"] = std::move(st);
  Json pairs = Json::array();
  for (const auto& p : t.pairs) {
    pairs.push_back(Json{{"i", p.i + 1},
                         {"j", p.j + 1},
                         {"coverage_pct", internal::num_or_null(p.coverage_pct)},
                         {"mean_length", internal::num_or_null(p.mean_length)}});
  }
  j["pairs"] = std::move(pairs);
  Json gamma = Json::array();
  for (const auto& g : t.gamma) {
    gamma.push_back(Json{{"index", g.index + 1},
                         {"coverage_bc_pct", internal::num_or_null(g.coverage_bc_pct)},
                         {"coverage_pct", internal::num_or_null(g.coverage_pct)},
                         {"mean_bias", internal::num_or_null(g.mean_bias)},
                         {"mean_bias_bc", internal::num_or_null(g.mean_bias_bc)},
                         {"median_estimate", internal::num_or_null(g.median_estimate)},
                         {"median_estimate_bc", internal::num_or_null(g.median_estimate_bc)},
                         {"mean_length", internal::num_or_null(g.mean_length)}});
  }
  j["gamma"] = std::move(gamma);
  return j;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace internal {

inline std::string fmt(double x) {
  if (!std::isfinite(x)) return "NA";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace internal

inline std::string inference_csv(const InferenceReport& r) {
  std::ostringstream os;
  os << "parameter,estimate,lower,upper,level\n";
  for (const auto& iv : r.intervals) {
    os << iv.label << ',' << internal::fmt(iv.estimate) << ','
       << internal::fmt(iv.lower) << ',' << internal::fmt(iv.upper) << ','
       << internal::fmt(iv.level) << '\n';
  }
  return os.str();
}

// One row per beta contrast (coverage / length / non-existence, as in the
// beta table) and per gamma component (corrected and uncorrected coverage,
// bias, length, non-existence, as in the gamma table).
inline std::string sim_table_csv(const SimTable& t) {
  std::ostringstream os;
  os << "table,n,c,epsilon_rule,epsilon,parameter,coverage_pct,"
        "coverage_uncorrected_pct,bias,bias_corrected,length,nonexistence_pct\n";
  const std::string head = std::to_string(t.n) + ',' + internal::fmt(t.c) + ',' +
                           t.epsilon_rule + ',' + internal::fmt(t.epsilon) + ',';
  for (const auto& p : t.pairs) {
    os << "beta," << head << '(' << p.i + 1 << ';' << p.j + 1 << "),"
       << internal::fmt(p.coverage_pct) << ",NA,NA,NA," << internal::fmt(p.mean_length)
       << ',' << internal::fmt(t.nonexistence_pct) << '\n';
  }
  for (const auto& g : t.gamma) {
    os << "gamma," << head << "gamma" << g.index + 1 << ','
       << internal::fmt(g.coverage_bc_pct) << ',' << internal::fmt(g.coverage_pct)
       << ',' << internal::fmt(g.mean_bias) << ',' << internal::fmt(g.mean_bias_bc)
       << ',' << internal::fmt(g.mean_length) << ','
       << internal::fmt(t.nonexistence_pct) << '\n';
  }
  return os.str();
}

// Sorted standardized contrasts against standard normal quantiles at
// (r - 0.5) / m, per reported pair.
inline std::string qq_csv(const SimTable& t) {
  std::ostringstream os;
  os << "pair,rank,normal_quantile,xi\n";
  for (const auto& p : t.pairs) {
    auto xi = p.xi;
    std::sort(xi.begin(), xi.end());
    const auto m = static_cast<double>(xi.size());
    for (std::size_t r = 0; r < xi.size(); ++r) {
      os << '(' << p.i + 1 << ';' << p.j + 1 << ")," << r + 1 << ','
         << internal::fmt(normal_quantile((static_cast<double>(r) + 0.5) / m)) << ','
         << internal::fmt(xi[r]) << '\n';
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Config files: JSON, or a TOML-like `key = value` format with `[section]`
// headers. Values are JSON literals; bare words are read as strings.
// ---------------------------------------------------------------------------

inline Json parse_key_value_config(const std::string& text) {
  Json root = Json::object();
  Json* section = &root;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_string = !in_string;
      if (line[i] == '#' && !in_string) {
        line.erase(i);
        break;
      }
    }
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    if (line.front() == '[') {
      if (line.back() != ']') throw DataError("config line " + std::to_string(lineno) + ": bad section");
      const std::string name = line.substr(1, line.size() - 2);
      section = &root[name];
      if (!section->is_object()) *section = Json::object();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    auto trim = [](std::string s) {
      const auto b2 = s.find_first_not_of(" \t");
      const auto e2 = s.find_last_not_of(" \t");
      return b2 == std::string::npos ? std::string() : s.substr(b2, e2 - b2 + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw DataError("config line " + std::to_string(lineno) + ": empty key or value");
    }
    Json parsed = Json::parse(value, nullptr, false);
    (*section)[key] = parsed.is_discarded() ? Json(value) : std::move(parsed);
  }
  return root;
}

inline Json read_config_file(const std::string& path) {
  auto in = internal::open_input(path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto b = text.find_first_not_of(" \t\r\n");
  if (b != std::string::npos && text[b] == '{') {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) throw DataError("'" + path + "' is not valid JSON");
    return j;
  }
  return parse_key_value_config(text);
}

inline Json read_json_file(const std::string& path) {
  auto in = internal::open_input(path);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("'" + path + "' is not valid JSON");
  return j;
}

}  // namespace dpbeta

#endif  // DPBETA_IO_HPP_

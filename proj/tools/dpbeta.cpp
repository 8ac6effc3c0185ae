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

// dpbeta: release, fit, infer and simulate the covariate-adjusted beta-model
// under (k, epsilon)-edge differential privacy.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "dpbeta/dpbeta.hpp"

namespace {

using namespace dpbeta;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNonExistence = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NetworkFlags {
  std::string edges;
  std::string attrs;
  std::string rule = "none";
  bool zero_indexed = false;
  bool drop_isolated = false;
  int nodes = 0;

  void add(CLI::App* cmd, bool required = true) {
    auto* e = cmd->add_option("--edges", edges, "Edge list: one 'u v' pair per line");
    if (required) e->required();
    cmd->add_option("--attrs", attrs, "Node attribute CSV: id,attr1,attr2,...");
    cmd->add_option("--covariates", rule, "Covariate rule: none, match or product")
        ->check(CLI::IsMember({"none", "match", "product"}));
    cmd->add_flag("--zero-indexed", zero_indexed, "Node ids start at 0 (default 1)");
    cmd->add_flag("--drop-isolated", drop_isolated, "Remove zero-degree nodes");
    cmd->add_option("--nodes", nodes, "Node count (default: largest id)");
  }

  LoadedNetwork load() const {
    DatasetSpec spec;
    spec.edge_file = edges;
    if (!attrs.empty()) spec.attr_file = attrs;
    spec.covariate_rule = covariate_rule_from_string(rule);
    spec.drop_isolated = drop_isolated;
    spec.zero_indexed = zero_indexed;
    if (nodes > 0) spec.num_nodes = nodes;
    return load_network(spec);
  }
};

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::vector<std::pair<int, int>> parse_pairs(const std::string& text, int n) {
  // "1,2;49,50" -> 0-based pairs
  std::vector<std::pair<int, int>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    const auto comma = item.find(',');
    if (comma == std::string::npos) throw UsageError("bad pair '" + item + "'");
    try {
      const int a = std::stoi(item.substr(0, comma)) - 1;
      const int b = std::stoi(item.substr(comma + 1)) - 1;
      if (a < 0 || b < 0 || a >= n || b >= n || a == b) {
        throw UsageError("pair '" + item + "' out of range");
      }
      out.emplace_back(a, b);
    } catch (const std::logic_error&) {
      throw UsageError("bad pair '" + item + "'");
    }
  }
  return out;
}

double resolve_epsilon(double epsilon, const std::string& rule, int n) {
  if (!rule.empty()) {
    if (rule == "logn_n16") return epsilon_of(EpsilonRule::logn_n16(), n);
    if (rule == "logn_n14") return epsilon_of(EpsilonRule::logn_n14(), n);
    throw UsageError("unknown --epsilon-rule '" + rule + "'");
  }
  if (!(epsilon > 0.0)) throw UsageError("--epsilon or --epsilon-rule is required");
  return epsilon;
}

void add_fit_flags(CLI::App* cmd, FitConfig& cfg) {
  cmd->add_option("--beta-tol", cfg.beta_tol, "Inner fixed-point tolerance (sup norm)");
  cmd->add_option("--gamma-tol", cfg.gamma_tol, "Outer Newton tolerance (sup norm)");
  cmd->add_option("--max-inner", cfg.max_inner_iters, "Inner iteration cap");
  cmd->add_option("--max-outer", cfg.max_outer_iters, "Outer iteration cap");
  cmd->add_option("--beta-bound", cfg.beta_divergence_bound,
                  "Sup-norm bound on beta declaring divergence");
  cmd->add_flag("--use-s-approx", cfg.use_S_approx,
                "Use diag(1/v_ii) in place of V^{-1} in the profiled Jacobian");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge-differentially private estimation for the covariate-adjusted beta-model"};
  app.require_subcommand(1);

  // stats
  NetworkFlags stats_net;
  std::string stats_out;
  auto* stats = app.add_subcommand("stats", "Summarize a network dataset");
  stats_net.add(stats);
  stats->add_option("--output,-o", stats_out, "Output file (default stdout)");

  // generate
  int gen_n = 100;
  double gen_c = 0.05;
  std::vector<double> gen_gamma{0.5, -0.5};
  std::uint64_t gen_seed = 1;
  std::string gen_edges, gen_attrs;
  auto* generate = app.add_subcommand(
      "generate", "Write a synthetic network (edge list + attribute CSV) from the simulation design");
  generate->add_option("--n", gen_n, "Node count")->check(CLI::Range(3, 100000));
  generate->add_option("--c", gen_c, "Slope of the linear beta* grid");
  generate->add_option("--gamma", gen_gamma, "Homophily parameter (2 values)")->expected(2);
  generate->add_option("--seed", gen_seed, "Random seed");
  generate->add_option("--edges", gen_edges, "Edge list output")->required();
  generate->add_option("--attrs", gen_attrs, "Attribute CSV output")->required();

  // release
  NetworkFlags rel_net;
  double rel_eps = 0.0;
  std::string rel_rule, rel_out;
  int rel_k = 1;
  std::uint64_t rel_seed = 1;
  auto* rel = app.add_subcommand("release", "Release noisy sufficient statistics");
  rel_net.add(rel);
  rel->add_option("--epsilon", rel_eps, "Total privacy parameter");
  rel->add_option("--epsilon-rule", rel_rule, "logn_n16 or logn_n14 (overrides --epsilon)");
  rel->add_option("--k", rel_k, "Edge-neighborhood size")->check(CLI::PositiveNumber);
  rel->add_option("--seed", rel_seed, "Random seed");
  rel->add_option("--output,-o", rel_out, "Output file (default stdout)");

  // fit
  NetworkFlags fit_net;
  std::string fit_released, fit_out;
  bool fit_no_privacy = false, fit_matrices = false;
  FitConfig fit_cfg;
  auto* fitc = app.add_subcommand("fit", "Solve the moment equations for a release");
  fit_net.add(fitc);
  fitc->add_option("--released", fit_released, "Released statistics JSON");
  fitc->add_flag("--no-privacy", fit_no_privacy, "Fit the exact statistics of the network");
  fitc->add_flag("--emit-matrices", fit_matrices, "Include V in the output");
  add_fit_flags(fitc, fit_cfg);
  fitc->add_option("--output,-o", fit_out, "Output file (default stdout)");

  // infer
  NetworkFlags inf_net;
  std::string inf_fit, inf_out, inf_pairs, inf_format = "json";
  std::string inf_corr = "second_order", inf_var = "inverse_h";
  double inf_level = 0.95;
  auto* inf = app.add_subcommand("infer", "Confidence intervals and bias correction for a fit");
  inf_net.add(inf);
  inf->add_option("--fit", inf_fit, "FitResult JSON")->required();
  inf->add_option("--level", inf_level, "Confidence level")->check(CLI::Range(0.0, 1.0));
  inf->add_option("--pairs", inf_pairs, "Beta contrasts, 1-based: '1,2;3,4' (default: five reference pairs)");
  inf->add_option("--bias-correction", inf_corr, "second_order or first_order")
      ->check(CLI::IsMember({"second_order", "first_order"}));
  inf->add_option("--gamma-variance", inf_var, "inverse_h or hbar_over_n")
      ->check(CLI::IsMember({"inverse_h", "hbar_over_n"}));
  inf->add_option("--format", inf_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  inf->add_option("--output,-o", inf_out, "Output file (default stdout)");

  // simulate
  std::string sim_config, sim_out, sim_qq, sim_format, sim_rule;
  std::optional<int> sim_n, sim_reps, sim_threads;
  std::optional<double> sim_c, sim_level;
  std::optional<std::uint64_t> sim_seed;
  bool sim_fixed = false, sim_no_privacy = false;
  auto* sim = app.add_subcommand("simulate", "Run a Monte-Carlo coverage design");
  sim->add_option("--config", sim_config, "Design file (JSON or key = value)");
  sim->add_option("--n", sim_n, "Node count");
  sim->add_option("--c", sim_c, "Slope of the linear beta* grid");
  sim->add_option("--epsilon-rule", sim_rule, "logn_n16, logn_n14, none or a number");
  sim->add_option("--replications", sim_reps, "Replications");
  sim->add_option("--seed", sim_seed, "Master seed");
  sim->add_option("--threads", sim_threads, "Worker threads (default: all cores)");
  sim->add_option("--level", sim_level, "Confidence level");
  sim->add_flag("--fixed-covariates", sim_fixed, "Draw covariates once per design");
  sim->add_flag("--no-privacy", sim_no_privacy, "Fit exact statistics");
  sim->add_option("--format", sim_format, "csv or json (default from extension)");
  sim->add_option("--qq-output", sim_qq, "Write standardized-contrast QQ data CSV");
  sim->add_option("--output,-o", sim_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*stats) {
      const auto ln = stats_net.load();
      const auto st = sufficient_stats(ln.network);
      std::vector<double> deg(st.degrees.begin(), st.degrees.end());
      Json j;
      j["n"] = ln.network.n();
      j["edges"] = ln.network.num_edges();
      j["p"] = ln.network.p();
      j["covariates"] = ln.covariate_names;
      j["z_star"] = ln.network.z_star();
      if (!deg.empty()) {
        const auto s = five_number_summary(deg);
        j["degree_summary"] = Json{{"min", s.min}, {"q1", s.q1}, {"median", s.median},
                                   {"q3", s.q3}, {"max", s.max}};
      }
      j["y"] = internal::vec_to_json(st.y);
      j["self_loops_dropped"] = ln.self_loops_dropped;
      j["duplicate_edges"] = ln.duplicate_edges;
      j["isolated_dropped"] = ln.isolated_dropped;
      j["labels"] = ln.labels;
      write_output(stats_out, dump(j));
      return kExitOk;
    }

    if (*generate) {
      if (gen_gamma.size() != 2) throw UsageError("--gamma takes two values");
      Rng rng(gen_seed);
      const auto cov = make_sim_covariates(gen_n, rng);
      const ModelParams truth{make_beta_star(gen_n, gen_c),
                              Eigen::Map<const Vector>(gen_gamma.data(), 2)};
      // Recover node attributes consistent with z_ij = x_i x_j by anchoring
      // node 1 at +1; the sign pattern is what the product rule needs.
      const Network net = sample_network(truth, cov, rng);
      std::ostringstream edges, attrs;
      for_each_pair(gen_n, [&](int i, int j, std::size_t idx) {
        if (net.edge_at_index(idx)) edges << i + 1 << ' ' << j + 1 << '\n';
      });
      attrs << "id,x1,x2\n";
      for (int i = 0; i < gen_n; ++i) {
        attrs << i + 1;
        for (int t = 0; t < 2; ++t) {
          const double x = i == 0 ? 1.0 : cov.at(0, i)[static_cast<std::size_t>(t)];
          attrs << ',' << (x > 0 ? 1 : -1);
        }
        attrs << '\n';
      }
      write_output(gen_edges, edges.str());
      write_output(gen_attrs, attrs.str());
      return kExitOk;
    }

    if (*rel) {
      const auto ln = rel_net.load();
      const int n = ln.network.n();
      PrivacyBudget budget{resolve_epsilon(rel_eps, rel_rule, n), rel_k};
      Rng rng(rel_seed);
      ReleasedStats r = release(ln.network, budget, rng);
      r.seed = rel_seed;
      write_output(rel_out, dump(to_json(r)));
      return kExitOk;
    }

    if (*fitc) {
      const auto ln = fit_net.load();
      ReleasedStats r;
      if (fit_no_privacy) {
        r = noiseless_release(sufficient_stats(ln.network));
      } else {
        if (fit_released.empty()) throw UsageError("fit needs --released or --no-privacy");
        r = released_from_json(read_json_file(fit_released));
      }
      const FitResult f = fit(r, ln.network.covariates(), fit_cfg);
      write_output(fit_out, dump(to_json(f, fit_matrices)));
      return f.exists ? kExitOk : kExitNonExistence;
    }

    if (*inf) {
      const auto ln = inf_net.load();
      FitResult f = fit_from_json(read_json_file(inf_fit));
      if (!f.exists) {
        throw DataError("fit result has exists=false (" +
                        std::string(to_string(f.status)) + "); nothing to infer");
      }
      complete_fit_matrices(f, ln.network.covariates());
      InferenceOptions opts;
      opts.level = inf_level;
      opts.correction = inf_corr == "first_order" ? BiasCorrection::kFirstOrder
                                             : BiasCorrection::kSecondOrder;
      opts.variance = inf_var == "hbar_over_n" ? GammaVariance::kHbarOverN
                                               : GammaVariance::kInverseH;
      const int n = ln.network.n();
      const auto pairs = inf_pairs.empty() ? default_pairs(n) : parse_pairs(inf_pairs, n);
      const auto report = infer(f, ln.network.covariates(), pairs, opts);
      write_output(inf_out, inf_format == "csv" ? inference_csv(report)
                                                : dump(to_json(report)));
      return kExitOk;
    }

    if (*sim) {
      SimDesign d;
      if (!sim_config.empty()) d = design_from_json(read_config_file(sim_config));
      if (sim_n) d.n = *sim_n;
      if (sim_c) d.c = *sim_c;
      if (!sim_rule.empty()) d.epsilon_rule = epsilon_rule_from_json(Json(sim_rule));
      if (sim_no_privacy) d.epsilon_rule = EpsilonRule::none();
      if (sim_reps) d.replications = *sim_reps;
      if (sim_seed) d.seed = *sim_seed;
      if (sim_threads) d.threads = *sim_threads;
      if (sim_level) d.inference.level = *sim_level;
      if (sim_fixed) d.fixed_covariates = true;
      try {
        d.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const SimTable t = run_design(d);
      std::string format = sim_format;
      if (format.empty()) {
        format = sim_out.size() >= 5 && sim_out.substr(sim_out.size() - 5) == ".json" ? "json" : "csv";
      }
      if (format == "json") {
        Json j;
        j["design"] = to_json(d);
        j["table"] = to_json(t);
        write_output(sim_out, dump(j));
      } else if (format == "csv") {
        write_output(sim_out, sim_table_csv(t));
      } else {
        throw UsageError("--format must be csv or json");
      }
      if (!sim_qq.empty()) write_output(sim_qq, qq_csv(t));
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

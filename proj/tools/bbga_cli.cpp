// Copyright 2026 The bbga-lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// bbga: command-line front end for dataset prep, clustering, attacks,
// defenses, evaluation and experiment grids.
//
// Exit codes: 0 ok, 2 configuration / usage error, 3 pipeline error.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bbga/analysis.hpp"
#include "bbga/attacks.hpp"
#include "bbga/bundle_io.hpp"
#include "bbga/clustering.hpp"
#include "bbga/defense.hpp"
#include "bbga/error.hpp"
#include "bbga/experiment.hpp"
#include "bbga/graph.hpp"
#include "bbga/kernels.hpp"
#include "bbga/rng.hpp"

namespace {

using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitPipeline = 3;

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw bbga::ConfigError("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw bbga::ConfigError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw bbga::DataError("cannot write " + path);
  f << text;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoul(item));
    } catch (const std::exception&) {
      throw bbga::ConfigError("bad block size list '" + s + "'");
    }
  }
  return out;
}

struct AttackOptions {
  std::string data;
  std::string method = "bbga";
  std::optional<double> rate;
  std::optional<std::size_t> budget;
  double eta = 0.01;
  std::optional<std::uint64_t> seed;
  std::string labels = "cluster";
  std::string pseudo_file;
  json bbga = json::object();
  std::size_t k = 5;
  std::size_t inner_steps = bbga::default_surrogate_config().steps;
  double inner_lr = bbga::default_surrogate_config().learning_rate;
  std::string sigma_filter = "strict";
  std::size_t threads = 0;
  std::string out;
};

bbga::Labels attacker_labels(const bbga::GraphBundle& g, const AttackOptions& o) {
  if (!o.pseudo_file.empty()) {
    const json j = read_json_file(o.pseudo_file);
    const auto labels = j.at("labels").get<bbga::Labels>();
    if (labels.size() != g.n_nodes) throw bbga::DataError("pseudo-label count mismatch");
    return labels;
  }
  if (o.labels == "ground_truth") {
    if (!g.labels) throw bbga::DataError("bundle has no labels");
    return *g.labels;
  }
  bbga::ClusterConfig cc;
  cc.seed = bbga::derive_seed(*o.seed, {40});
  return bbga::pseudo_labels(g, cc).labels;
}

int run_attack(const AttackOptions& o) {
  if (o.rate.has_value() == o.budget.has_value())
    throw bbga::ConfigError("give exactly one of --rate or --budget");
  const bbga::GraphBundle g = bbga::load_bundle(o.data);
  const bbga::AttackBudget budget = o.rate ? bbga::AttackBudget::from_rate(*o.rate, g.n_edges())
                                           : bbga::AttackBudget::from_count(*o.budget);
  const bbga::Constraint constraint(g.features, o.eta);

  bbga::BbgaConfig base;
  base.k = o.k;
  base.inner.steps = o.inner_steps;
  base.inner.learning_rate = o.inner_lr;
  bool found = false;
  for (auto f : {bbga::SigmaFilter::kStrict, bbga::SigmaFilter::kLessEqual, bbga::SigmaFilter::kOff})
    if (o.sigma_filter == bbga::to_string(f)) base.sigma_filter = f, found = true;
  if (!found) throw bbga::ConfigError("unknown --sigma-filter " + o.sigma_filter);
  base.master_seed = *o.seed;
  base.threads = o.threads;
  const bbga::AttackSpec spec = bbga::parse_attack(o.method, base);
  spec.bbga.validate();

  bbga::AttackPlan plan;
  switch (spec.kind) {
    case bbga::AttackSpec::Kind::kRandom:
      plan = bbga::attack_random(g, budget, constraint, *o.seed);
      break;
    case bbga::AttackSpec::Kind::kDice: {
      const bool bb = spec.dice_mode == bbga::DiceMode::kBlackBox;
      if (!bb && !g.labels) throw bbga::DataError(o.method + " needs ground-truth labels");
      const bbga::Labels labels = bb ? attacker_labels(g, o) : *g.labels;
      bbga::NodeSet control;
      if (spec.dice_mode == bbga::DiceMode::kControl) control = g.split("train");
      plan = bbga::attack_dice(g, budget, constraint, labels, spec.dice_mode, control, *o.seed);
      break;
    }
    case bbga::AttackSpec::Kind::kMettack:
      plan = bbga::attack_mettack_bb(g, budget, constraint, attacker_labels(g, o), spec.bbga);
      break;
    case bbga::AttackSpec::Kind::kBbga:
      plan = bbga::attack_bbga(g, budget, constraint, attacker_labels(g, o), spec.bbga);
      break;
  }
  plan.method = o.method;
  write_text(o.out, bbga::plan_to_json(plan).dump(2) + "\n");
  return 0;
}

bbga::GraphBundle bundle_with_plan(const std::string& data, const std::string& plan_path,
                                   std::optional<bbga::AttackPlan>* plan_out = nullptr) {
  bbga::GraphBundle g = bbga::load_bundle(data);
  if (!plan_path.empty()) {
    bbga::AttackPlan plan = bbga::plan_from_json(read_json_file(plan_path), g.adjacency);
    if (plan_out) *plan_out = plan;
    g.adjacency = plan.adjacency;
  }
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bbga: graph structure poisoning toolkit"};
  app.require_subcommand(1);

  // dataset -------------------------------------------------------------
  auto* dataset = app.add_subcommand("dataset", "Generate, inspect or reduce graph bundles");
  dataset->require_subcommand(1);

  bbga::SbmConfig sbm;
  std::string blocks = "100,100";
  std::string gen_out;
  double train_fraction = 0.1, val_fraction = 0.1;
  auto* gen = dataset->add_subcommand("generate", "Sample a stochastic block model bundle");
  gen->add_option("--blocks", blocks, "Comma-separated block sizes")->capture_default_str();
  gen->add_option("--p-in", sbm.p_in, "Within-block edge probability")->capture_default_str();
  gen->add_option("--p-out", sbm.p_out, "Across-block edge probability")->capture_default_str();
  gen->add_option("--feature-dim", sbm.feature_dim)->capture_default_str();
  gen->add_option("--flip-prob", sbm.feature_flip_prob, "Feature bit noise")->capture_default_str();
  gen->add_option("--train-fraction", train_fraction)->capture_default_str();
  gen->add_option("--val-fraction", val_fraction)->capture_default_str();
  gen->add_option("--seed", sbm.seed)->required();
  gen->add_option("--out", gen_out, "Output bundle directory")->required();

  std::string info_data;
  auto* info = dataset->add_subcommand("info", "Print bundle statistics as JSON");
  info->add_option("--data", info_data)->required();

  std::string lcc_data, lcc_out;
  auto* lcc = dataset->add_subcommand("lcc", "Keep the largest connected component");
  lcc->add_option("--data", lcc_data)->required();
  lcc->add_option("--out", lcc_out)->required();

  // cluster -------------------------------------------------------------
  std::string cl_data, cl_out;
  bbga::ClusterConfig ccfg;
  std::size_t k_min = 2, k_max = 10;
  auto* cluster = app.add_subcommand("cluster", "Spectral pseudo-labels with CH model selection");
  cluster->add_option("--data", cl_data)->required();
  cluster->add_option("--gamma", ccfg.gamma)->capture_default_str();
  cluster->add_option("--k-min", k_min)->capture_default_str();
  cluster->add_option("--k-max", k_max)->capture_default_str();
  cluster->add_option("--restarts", ccfg.kmeans_restarts)->capture_default_str();
  cluster->add_option("--seed", ccfg.seed)->capture_default_str();
  cluster->add_flag("--mix-adjacency", ccfg.mix_adjacency);
  std::string cl_space = "input";
  cluster->add_option("--score-space", cl_space, "Where CH is measured: input | embedding")
      ->capture_default_str();
  cluster->add_option("--out", cl_out, "Output JSON (default stdout)");

  // attack --------------------------------------------------------------
  AttackOptions ao;
  auto* attack = app.add_subcommand("attack", "Compute a poisoning plan");
  attack->add_option("--data", ao.data)->required();
  attack->add_option("--method", ao.method,
                     "random | dice-free | dice-control | dice-bb | mettack-bb | bbga | "
                     "bbga-alpha | bbga-beta | bbga-k<N>")
      ->capture_default_str();
  attack->add_option("--rate", ao.rate, "Budget as a fraction of clean edges");
  attack->add_option("--budget", ao.budget, "Budget as a flip count");
  attack->add_option("--eta", ao.eta, "Jaccard threshold for additions")->capture_default_str();
  attack->add_option("--seed", ao.seed)->required();
  attack->add_option("--labels", ao.labels, "cluster | ground_truth")
      ->check(CLI::IsMember({"cluster", "ground_truth"}))
      ->capture_default_str();
  attack->add_option("--pseudo", ao.pseudo_file, "Pseudo-labels JSON from `bbga cluster`");
  attack->add_option("--k", ao.k, "Number of folds")->capture_default_str();
  attack->add_option("--inner-steps", ao.inner_steps)->capture_default_str();
  attack->add_option("--inner-lr", ao.inner_lr)->capture_default_str();
  attack->add_option("--sigma-filter", ao.sigma_filter, "strict | lte | off")->capture_default_str();
  attack->add_option("--threads", ao.threads)->capture_default_str();
  attack->add_option("--out", ao.out, "Plan JSON (default stdout)");

  // defend --------------------------------------------------------------
  std::string df_data, df_plan, df_defense = "jaccard", df_out;
  double df_eta = 0.01;
  std::uint64_t df_seed = 0;
  auto* defend = app.add_subcommand("defend", "Apply a defense and report test accuracy");
  defend->add_option("--data", df_data)->required();
  defend->add_option("--plan", df_plan, "Attack plan to apply first");
  defend->add_option("--defense", df_defense, "none | jaccard | flip")->capture_default_str();
  defend->add_option("--eta", df_eta)->capture_default_str();
  defend->add_option("--seed", df_seed, "GCN init seed")->capture_default_str();
  defend->add_option("--out", df_out, "Write the preprocessed bundle here (jaccard only)");

  // evaluate ------------------------------------------------------------
  std::string ev_data, ev_plan, ev_defense = "none", ev_out;
  bbga::EvaluationConfig ecfg;
  std::optional<std::uint64_t> ev_seed;
  bool ev_keep_split = false;
  auto* evaluate = app.add_subcommand("evaluate", "Poisoning evaluation over repeated trials");
  evaluate->add_option("--data", ev_data)->required();
  evaluate->add_option("--plan", ev_plan, "Attack plan (omit for the clean graph)");
  evaluate->add_option("--defense", ev_defense, "none | jaccard | flip")->capture_default_str();
  evaluate->add_option("--trials", ecfg.trials)->capture_default_str();
  evaluate->add_option("--eta", ecfg.eta)->capture_default_str();
  evaluate->add_option("--seed", ev_seed)->required();
  evaluate->add_flag("--keep-split", ev_keep_split, "Reuse the bundle split in every trial");
  evaluate->add_option("--threads", ecfg.threads)->capture_default_str();
  evaluate->add_option("--out", ev_out, "Report JSON (default stdout)");

  // experiment ----------------------------------------------------------
  auto* experiment = app.add_subcommand("experiment", "Run or compare experiment grids");
  experiment->require_subcommand(1);
  std::string ex_config, ex_out;
  auto* ex_run = experiment->add_subcommand("run", "Run a config and write its artifacts");
  ex_run->add_option("--config", ex_config)->required();
  ex_run->add_option("--out", ex_out, "Artifact directory")->required();

  std::string cmp_config, cmp_results, cmp_out;
  auto* ex_cmp = experiment->add_subcommand("compare", "Rank attacks by misclassification");
  auto* cmp_cfg_opt = ex_cmp->add_option("--config", cmp_config, "Run this config, then rank");
  auto* cmp_res_opt = ex_cmp->add_option("--results", cmp_results, "Rank an existing results.csv");
  cmp_cfg_opt->excludes(cmp_res_opt);
  ex_cmp->add_option("--out", cmp_out, "Directory (--config) or ranking CSV (--results)");

  // analyze -------------------------------------------------------------
  auto* analyze = app.add_subcommand("analyze", "Perturbation analysis");
  analyze->require_subcommand(1);
  std::string lp_data, lp_plan, lp_set = "train", lp_out;
  auto* local_ptb = analyze->add_subcommand("local-ptb", "Local perturbation rates of a plan");
  local_ptb->add_option("--data", lp_data)->required();
  local_ptb->add_option("--plan", lp_plan)->required();
  local_ptb->add_option("--set", lp_set, "Bundle split or plan node set")->capture_default_str();
  local_ptb->add_option("--out", lp_out, "CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      sbm.block_sizes = parse_sizes(blocks);
      sbm.validate();
      bbga::GraphBundle g = bbga::generate_sbm(sbm);
      bbga::SplitConfig sc{train_fraction, val_fraction, bbga::derive_seed(sbm.seed, {10})};
      sc.validate();
      g.splits = bbga::make_random_splits(g.n_nodes, sc);
      bbga::save_bundle(g, gen_out);
    } else if (*info) {
      const bbga::GraphBundle g = bbga::load_bundle(info_data);
      json j = {{"n_nodes", g.n_nodes},
                {"n_edges", g.n_edges()},
                {"n_features", g.n_features()},
                {"n_components", [&] {
                   auto comp = bbga::connected_components(g.adjacency);
                   std::size_t m = 0;
                   for (auto c : comp) m = std::max(m, c + 1);
                   return m;
                 }()},
                {"kernels", bbga::kernels::active().name}};
      if (g.n_classes) j["n_classes"] = *g.n_classes;
      for (const auto& [name, nodes] : g.splits) j["splits"][name] = nodes.size();
      std::cout << j.dump(2) << "\n";
    } else if (*lcc) {
      bbga::save_bundle(bbga::largest_connected_component(bbga::load_bundle(lcc_data)), lcc_out);
    } else if (*cluster) {
      ccfg.score_space = bbga::parse_score_space(cl_space);
      ccfg.candidate_k.clear();
      for (std::size_t k = k_min; k <= k_max; ++k) ccfg.candidate_k.push_back(k);
      ccfg.validate();
      const bbga::GraphBundle g = bbga::load_bundle(cl_data);
      const bbga::PseudoLabelResult r = bbga::pseudo_labels(g, ccfg);
      json scores = json::array();
      for (const auto& s : r.scores) scores.push_back({{"k", s.k}, {"score", s.score}});
      json j = {{"chosen_k", r.chosen_k}, {"scores", scores}, {"labels", r.labels}};
      write_text(cl_out, j.dump() + "\n");
    } else if (*attack) {
      return run_attack(ao);
    } else if (*defend) {
      std::optional<bbga::AttackPlan> plan;
      bbga::GraphBundle g = bundle_with_plan(df_data, df_plan, &plan);
      const bbga::Defense d = bbga::parse_defense(df_defense);
      bbga::TrainConfig tc = bbga::default_gcn_config();
      tc.init_seed = df_seed;
      if (!df_out.empty()) {
        if (d != bbga::Defense::kJaccard) throw bbga::ConfigError("--out needs --defense jaccard");
        bbga::save_bundle(bbga::jaccard_preprocess(g, df_eta), df_out);
      }
      const double acc = bbga::defended_test_accuracy(g, d, df_eta, tc);
      std::cout << json{{"defense", df_defense}, {"test_accuracy", acc}}.dump() << "\n";
    } else if (*evaluate) {
      const bbga::GraphBundle g = bbga::load_bundle(ev_data);
      bbga::AttackPlan plan;
      if (!ev_plan.empty()) {
        plan = bbga::plan_from_json(read_json_file(ev_plan), g.adjacency);
      } else {
        plan.method = "none";
        plan.adjacency = g.adjacency;
      }
      ecfg.defense = bbga::parse_defense(ev_defense);
      ecfg.seed = *ev_seed;
      ecfg.resplit = !ev_keep_split;
      write_text(ev_out, bbga::evaluate_poisoned(g, plan, ecfg).to_json().dump(2) + "\n");
    } else if (*ex_run) {
      const json cfg = bbga::resolve_experiment_config(read_json_file(ex_config));
      bbga::write_experiment(bbga::run_experiment(cfg), ex_out, false);
    } else if (*ex_cmp) {
      if (!cmp_results.empty()) {
        const auto rows = bbga::read_results_csv(cmp_results);
        write_text(cmp_out, bbga::ranking_csv(bbga::rank_attacks(rows), ""));
      } else if (!cmp_config.empty()) {
        if (cmp_out.empty()) throw bbga::ConfigError("--config needs --out DIR");
        const json cfg = bbga::resolve_experiment_config(read_json_file(cmp_config));
        if (cfg["attacks"].size() < 2) throw bbga::ConfigError("compare needs at least two attacks");
        bbga::write_experiment(bbga::run_experiment(cfg), cmp_out, true);
      } else {
        throw bbga::ConfigError("give --config or --results");
      }
    } else if (*local_ptb) {
      const bbga::GraphBundle clean = bbga::load_bundle(lp_data);
      bbga::AttackPlan p = bbga::plan_from_json(read_json_file(lp_plan), clean.adjacency);
      const bbga::NodeSet& set =
          p.node_sets.count(lp_set) ? p.node_sets.at(lp_set) : clean.split(lp_set);
      const auto r = bbga::local_perturbation_rates(clean.adjacency, p.adjacency, set, lp_set);
      std::ostringstream out;
      out << "set,global_rate,inside_rate,adjacent_rate,total_flips,clean_edges,inside_flips,"
             "inside_edges,adjacent_flips,adjacent_edges\n"
          << r.set_name << "," << bbga::fmt_double(r.global_rate) << ","
          << bbga::fmt_double(r.inside_rate) << "," << bbga::fmt_double(r.adjacent_rate) << ","
          << r.total_flips << "," << r.clean_edges << "," << r.inside_flips << ","
          << r.inside_edges << "," << r.adjacent_flips << "," << r.adjacent_edges << "\n";
      write_text(lp_out, out.str());
    }
  } catch (const bbga::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
  return 0;
}

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

#include "bbga/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "bbga/bundle_io.hpp"
#include "bbga/error.hpp"
#include "bbga/rng.hpp"

namespace bbga {

using nlohmann::json;

namespace {

constexpr std::uint64_t kReferenceSplitTag = 10;
constexpr std::uint64_t kMetaAttackTag = 20;
constexpr std::uint64_t kBaselineAttackTag = 21;
constexpr std::uint64_t kEvaluationTag = 30;
constexpr std::uint64_t kClusterTag = 40;
constexpr std::uint64_t kDatasetTag = 50;

const std::set<std::string> kPresets = {"grid",    "unevenness", "ablation",
                                        "k-sweep", "dice",       "flip-defense"};

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + key + "' in " + where + ": " + e.what());
  }
}

json preset_defaults(const std::string& preset) {
  json d;
  d["defenses"] = {"none"};
  d["evaluation_split"] = "random";
  if (preset == "grid") {
    d["attacks"] = {"random", "dice-bb", "mettack-bb", "bbga"};
    d["rates"] = {0.05, 0.10, 0.15, 0.20};
  } else if (preset == "unevenness") {
    d["attacks"] = {"mettack-bb"};
    d["rates"] = {0.05, 0.10, 0.15, 0.20, 0.25};
  } else if (preset == "ablation") {
    d["attacks"] = {"bbga", "bbga-alpha", "bbga-beta"};
    d["rates"] = {0.20};
  } else if (preset == "k-sweep") {
    d["attacks"] = {"bbga-k2", "bbga-k3", "bbga-k5", "bbga-k7", "bbga-k10"};
    d["rates"] = {0.20};
  } else if (preset == "dice") {
    d["attacks"] = {"dice-free", "dice-control"};
    d["rates"] = {0.50};
    d["evaluation_split"] = "reference";
  } else {  // flip-defense
    d["attacks"] = {"dice-control"};
    d["rates"] = {0.20};
    d["defenses"] = {"none", "flip"};
    d["evaluation_split"] = "reference";
  }
  return d;
}

json resolve_dataset(const json& raw) {
  const std::string where = "dataset";
  reject_unknown(raw, {"sbm", "path"}, where);
  if (raw.contains("sbm") == raw.contains("path"))
    throw ConfigError("dataset needs exactly one of 'sbm' or 'path'");
  if (raw.contains("path")) return {{"path", get_or<std::string>(raw, "path", "", where)}};
  const json& s = raw["sbm"];
  reject_unknown(s, {"block_sizes", "p_in", "p_out", "feature_dim", "feature_flip_prob"},
                 "dataset.sbm");
  SbmConfig c;
  c.block_sizes = get_or<std::vector<std::size_t>>(s, "block_sizes", {100, 100}, "dataset.sbm");
  c.p_in = get_or(s, "p_in", 0.1, "dataset.sbm");
  c.p_out = get_or(s, "p_out", 0.01, "dataset.sbm");
  c.feature_dim = get_or<std::size_t>(s, "feature_dim", 32, "dataset.sbm");
  c.feature_flip_prob = get_or(s, "feature_flip_prob", 0.1, "dataset.sbm");
  c.validate();
  return {{"sbm",
           {{"block_sizes", c.block_sizes},
            {"p_in", c.p_in},
            {"p_out", c.p_out},
            {"feature_dim", c.feature_dim},
            {"feature_flip_prob", c.feature_flip_prob}}}};
}

json resolve_cluster(const json& raw) {
  const std::string where = "cluster";
  reject_unknown(raw, {"gamma", "candidate_k", "restarts", "iters", "mix_adjacency", "score_space"},
                 where);
  ClusterConfig c;
  json out = {{"gamma", get_or(raw, "gamma", c.gamma, where)},
              {"candidate_k", get_or(raw, "candidate_k", c.candidate_k, where)},
              {"restarts", get_or(raw, "restarts", c.kmeans_restarts, where)},
              {"iters", get_or(raw, "iters", c.kmeans_iters, where)},
              {"mix_adjacency", get_or(raw, "mix_adjacency", c.mix_adjacency, where)},
              {"score_space", get_or<std::string>(raw, "score_space", "input", where)}};
  cluster_config_from_json(out, 0).validate();
  return out;
}

json resolve_train(const json& raw, const TrainConfig& d, const std::string& where) {
  reject_unknown(raw, {"steps", "lr", "hidden", "init_scale"}, where);
  json out = {{"steps", get_or(raw, "steps", d.steps, where)},
              {"lr", get_or(raw, "lr", d.learning_rate, where)},
              {"hidden", get_or(raw, "hidden", d.hidden, where)},
              {"init_scale", get_or(raw, "init_scale", d.init_scale, where)}};
  gcn_config_from_json(out).validate();
  return out;
}

json resolve_bbga(const json& raw) {
  const std::string where = "bbga";
  reject_unknown(raw,
                 {"k", "inner", "surrogate", "fold_labels", "refresh_targets", "sigma_filter",
                  "median_scope", "surrogate_train_fraction"},
                 where);
  BbgaConfig d;
  json out = {
      {"k", get_or(raw, "k", d.k, where)},
      {"inner", resolve_train(raw.value("inner", json::object()), d.inner, "bbga.inner")},
      {"surrogate",
       resolve_train(raw.value("surrogate", json::object()), d.surrogate, "bbga.surrogate")},
      {"fold_labels", get_or<std::string>(raw, "fold_labels", to_string(d.fold_labels), where)},
      {"refresh_targets", get_or(raw, "refresh_targets", d.refresh_targets, where)},
      {"sigma_filter", get_or<std::string>(raw, "sigma_filter", to_string(d.sigma_filter), where)},
      {"median_scope", get_or<std::string>(raw, "median_scope",
                                           d.median_scope == MedianScope::kAllPairs ? "all" : "valid",
                                           where)},
      {"surrogate_train_fraction",
       get_or(raw, "surrogate_train_fraction", d.surrogate_train_fraction, where)}};
  bbga_config_from_json(out).validate();
  return out;
}

SigmaFilter parse_sigma_filter(const std::string& s) {
  for (SigmaFilter f : {SigmaFilter::kStrict, SigmaFilter::kLessEqual, SigmaFilter::kOff})
    if (s == to_string(f)) return f;
  throw ConfigError("unknown sigma_filter '" + s + "'");
}

FoldLabels parse_fold_labels(const std::string& s) {
  for (FoldLabels f : {FoldLabels::kSurrogatePredictions, FoldLabels::kClusterLabels})
    if (s == to_string(f)) return f;
  throw ConfigError("unknown fold_labels '" + s + "'");
}

std::string csv_config_line(const json& cfg) { return "# config=" + cfg.dump() + "\n"; }

}  // namespace

TrainConfig gcn_config_from_json(const json& j) {
  TrainConfig c;
  c.steps = j.at("steps").get<std::size_t>();
  c.learning_rate = j.at("lr").get<double>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.init_scale = j.at("init_scale").get<double>();
  return c;
}

ClusterConfig cluster_config_from_json(const json& j, std::uint64_t seed) {
  ClusterConfig c;
  c.gamma = j.at("gamma").get<double>();
  c.candidate_k = j.at("candidate_k").get<std::vector<std::size_t>>();
  c.kmeans_restarts = j.at("restarts").get<std::size_t>();
  c.kmeans_iters = j.at("iters").get<std::size_t>();
  c.mix_adjacency = j.at("mix_adjacency").get<bool>();
  c.score_space = parse_score_space(j.at("score_space").get<std::string>());
  c.seed = seed;
  return c;
}

BbgaConfig bbga_config_from_json(const json& j) {
  BbgaConfig c;
  c.k = j.at("k").get<std::size_t>();
  c.inner = gcn_config_from_json(j.at("inner"));
  c.surrogate = gcn_config_from_json(j.at("surrogate"));
  c.fold_labels = parse_fold_labels(j.at("fold_labels").get<std::string>());
  c.refresh_targets = j.at("refresh_targets").get<bool>();
  c.sigma_filter = parse_sigma_filter(j.at("sigma_filter").get<std::string>());
  const std::string scope = j.at("median_scope").get<std::string>();
  if (scope == "all") {
    c.median_scope = MedianScope::kAllPairs;
  } else if (scope == "valid") {
    c.median_scope = MedianScope::kValidPairs;
  } else {
    throw ConfigError("unknown median_scope '" + scope + "'");
  }
  c.surrogate_train_fraction = j.at("surrogate_train_fraction").get<double>();
  return c;
}

AttackSpec parse_attack(const std::string& name, const BbgaConfig& base) {
  AttackSpec s;
  s.name = name;
  s.bbga = base;
  if (name == "random") {
    s.kind = AttackSpec::Kind::kRandom;
  } else if (name == "dice-free" || name == "dice-control" || name == "dice-bb") {
    s.kind = AttackSpec::Kind::kDice;
    s.dice_mode = name == "dice-free"      ? DiceMode::kFree
                  : name == "dice-control" ? DiceMode::kControl
                                           : DiceMode::kBlackBox;
  } else if (name == "mettack-bb") {
    s.kind = AttackSpec::Kind::kMettack;
  } else if (name == "bbga") {
    s.kind = AttackSpec::Kind::kBbga;
  } else if (name == "bbga-alpha") {
    s.kind = AttackSpec::Kind::kBbga;
    s.bbga.sigma_filter = SigmaFilter::kOff;
  } else if (name == "bbga-beta") {
    s.kind = AttackSpec::Kind::kBbga;
    s.bbga.folds = FoldSelection::kRandomOne;
  } else if (name.rfind("bbga-k", 0) == 0 && name.size() > 6 &&
             std::all_of(name.begin() + 6, name.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    s.kind = AttackSpec::Kind::kBbga;
    s.bbga.k = std::stoul(name.substr(6));
    if (s.bbga.k < 2) throw ConfigError("bbga-k needs k >= 2: " + name);
  } else {
    throw ConfigError("unknown attack '" + name + "'");
  }
  return s;
}

json resolve_experiment_config(const json& raw) {
  reject_unknown(raw,
                 {"schema_version", "preset", "seed", "dataset", "lcc", "labels", "cluster",
                  "attacks", "rates", "defenses", "eta", "trials", "bbga", "gcn", "split",
                  "evaluation_split", "threads"},
                 "config");
  const int version = get_or(raw, "schema_version", kConfigSchemaVersion, "config");
  if (version != kConfigSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(version));
  const std::string preset = get_or<std::string>(raw, "preset", "grid", "config");
  if (!kPresets.count(preset)) throw ConfigError("unknown preset '" + preset + "'");
  if (!raw.contains("seed")) throw ConfigError("config needs an explicit 'seed'");
  const json d = preset_defaults(preset);

  json out;
  out["schema_version"] = version;
  out["preset"] = preset;
  out["seed"] = get_or<std::uint64_t>(raw, "seed", 0, "config");
  out["dataset"] = resolve_dataset(raw.value("dataset", json{{"sbm", json::object()}}));
  out["lcc"] = get_or(raw, "lcc", false, "config");
  out["labels"] = get_or<std::string>(raw, "labels", "cluster", "config");
  if (out["labels"] != "cluster" && out["labels"] != "ground_truth")
    throw ConfigError("labels must be 'cluster' or 'ground_truth'");
  out["cluster"] = resolve_cluster(raw.value("cluster", json::object()));
  out["attacks"] = get_or(raw, "attacks", d["attacks"].get<std::vector<std::string>>(), "config");
  out["rates"] = get_or(raw, "rates", d["rates"].get<std::vector<double>>(), "config");
  out["defenses"] =
      get_or(raw, "defenses", d["defenses"].get<std::vector<std::string>>(), "config");
  out["eta"] = get_or(raw, "eta", 0.01, "config");
  out["trials"] = get_or<std::size_t>(raw, "trials", 10, "config");
  out["bbga"] = resolve_bbga(raw.value("bbga", json::object()));
  out["gcn"] = resolve_train(raw.value("gcn", json::object()), default_gcn_config(), "gcn");
  {
    const json s = raw.value("split", json::object());
    reject_unknown(s, {"train_fraction", "val_fraction"}, "split");
    SplitConfig sc;
    sc.train_fraction = get_or(s, "train_fraction", sc.train_fraction, "split");
    sc.val_fraction = get_or(s, "val_fraction", sc.val_fraction, "split");
    sc.validate();
    out["split"] = {{"train_fraction", sc.train_fraction}, {"val_fraction", sc.val_fraction}};
  }
  out["evaluation_split"] =
      get_or<std::string>(raw, "evaluation_split", d["evaluation_split"].get<std::string>(), "config");
  if (out["evaluation_split"] != "random" && out["evaluation_split"] != "reference")
    throw ConfigError("evaluation_split must be 'random' or 'reference'");
  out["threads"] = get_or<std::size_t>(raw, "threads", 0, "config");

  if (out["attacks"].empty()) throw ConfigError("no attacks configured");
  std::set<std::string> seen;
  const BbgaConfig base = bbga_config_from_json(out["bbga"]);
  for (const auto& a : out["attacks"]) {
    parse_attack(a.get<std::string>(), base);
    if (!seen.insert(a.get<std::string>()).second)
      throw ConfigError("attack listed twice: " + a.get<std::string>());
  }
  if (out["rates"].empty()) throw ConfigError("no rates configured");
  for (const auto& r : out["rates"])
    if (!(r.get<double>() >= 0.0)) throw ConfigError("rates must be >= 0");
  if (out["defenses"].empty()) throw ConfigError("no defenses configured");
  for (const auto& dname : out["defenses"]) parse_defense(dname.get<std::string>());
  if (out["trials"].get<std::size_t>() == 0) throw ConfigError("trials must be >= 1");
  if (!(out["eta"].get<double>() >= 0.0)) throw ConfigError("eta must be >= 0");
  return out;
}

GraphBundle experiment_dataset(const json& cfg) {
  const json& ds = cfg.at("dataset");
  GraphBundle g;
  if (ds.contains("path")) {
    g = load_bundle(ds["path"].get<std::string>());
  } else {
    const json& s = ds.at("sbm");
    SbmConfig c;
    c.block_sizes = s.at("block_sizes").get<std::vector<std::size_t>>();
    c.p_in = s.at("p_in").get<double>();
    c.p_out = s.at("p_out").get<double>();
    c.feature_dim = s.at("feature_dim").get<std::size_t>();
    c.feature_flip_prob = s.at("feature_flip_prob").get<double>();
    c.seed = derive_seed(cfg.at("seed").get<std::uint64_t>(), {kDatasetTag});
    g = generate_sbm(c);
  }
  if (cfg.at("lcc").get<bool>()) g = largest_connected_component(g);
  const bool has_splits = g.splits.count("train") && g.splits.count("val") && g.splits.count("test");
  if (!has_splits) {
    SplitConfig sc;
    sc.train_fraction = cfg.at("split").at("train_fraction").get<double>();
    sc.val_fraction = cfg.at("split").at("val_fraction").get<double>();
    sc.seed = derive_seed(cfg.at("seed").get<std::uint64_t>(), {kReferenceSplitTag});
    g.splits = make_random_splits(g.n_nodes, sc);
  }
  return g;
}

ExperimentResult run_experiment(const json& resolved) {
  ExperimentResult result;
  result.config = resolved;
  const std::uint64_t seed = resolved.at("seed").get<std::uint64_t>();
  const GraphBundle g = experiment_dataset(resolved);
  result.n_nodes = g.n_nodes;
  result.n_edges = g.n_edges();

  const BbgaConfig base = bbga_config_from_json(resolved.at("bbga"));
  std::vector<AttackSpec> specs;
  for (const auto& a : resolved.at("attacks")) specs.push_back(parse_attack(a.get<std::string>(), base));

  const bool needs_pseudo = std::any_of(specs.begin(), specs.end(), [](const AttackSpec& s) {
    return s.kind == AttackSpec::Kind::kMettack || s.kind == AttackSpec::Kind::kBbga ||
           (s.kind == AttackSpec::Kind::kDice && s.dice_mode == DiceMode::kBlackBox);
  });
  Labels pseudo;
  if (needs_pseudo) {
    if (resolved.at("labels") == "ground_truth") {
      if (!g.labels) throw DataError("labels=ground_truth but the dataset has no labels");
      pseudo = *g.labels;
    } else {
      result.clustering = pseudo_labels(
          g, cluster_config_from_json(resolved.at("cluster"), derive_seed(seed, {kClusterTag})));
      pseudo = result.clustering->labels;
    }
  }

  const double eta = resolved.at("eta").get<double>();
  const Constraint constraint(g.features, eta);
  const std::size_t threads = resolved.at("threads").get<std::size_t>();
  const auto rates = resolved.at("rates").get<std::vector<double>>();
  const auto defenses = resolved.at("defenses").get<std::vector<std::string>>();
  const NodeSet& reference_train = g.split("train");

  for (std::size_t ai = 0; ai < specs.size(); ++ai) {
    const AttackSpec& spec = specs[ai];
    for (std::size_t ri = 0; ri < rates.size(); ++ri) {
      const AttackBudget budget = AttackBudget::from_rate(rates[ri], result.n_edges);
      ExperimentRun run;
      run.attack = spec.name;
      run.rate = rates[ri];
      switch (spec.kind) {
        case AttackSpec::Kind::kRandom:
          run.plan = attack_random(g, budget, constraint,
                                   derive_seed(seed, {kBaselineAttackTag, ai, ri}));
          break;
        case AttackSpec::Kind::kDice: {
          const bool black_box = spec.dice_mode == DiceMode::kBlackBox;
          if (!black_box && !g.labels)
            throw DataError(spec.name + " needs ground-truth labels");
          run.plan = attack_dice(g, budget, constraint, black_box ? pseudo : *g.labels,
                                 spec.dice_mode, reference_train,
                                 derive_seed(seed, {kBaselineAttackTag, ai, ri}));
          break;
        }
        case AttackSpec::Kind::kMettack:
        case AttackSpec::Kind::kBbga: {
          BbgaConfig c = spec.bbga;
          // Shared per rate so meta attacks see the same partition and surrogate.
          c.master_seed = derive_seed(seed, {kMetaAttackTag, ri});
          c.threads = threads;
          run.plan = spec.kind == AttackSpec::Kind::kMettack
                         ? attack_mettack_bb(g, budget, constraint, pseudo, c)
                         : attack_bbga(g, budget, constraint, pseudo, c);
          break;
        }
      }
      run.plan.method = spec.name;

      const auto ptb_set = run.plan.node_sets.count("attacker_train")
                               ? run.plan.node_sets.at("attacker_train")
                               : run.plan.node_sets.count("control")
                                     ? run.plan.node_sets.at("control")
                                     : NodeSet{};
      if (!ptb_set.empty())
        run.local_ptb.push_back(
            local_perturbation_rates(g.adjacency, run.plan.adjacency, ptb_set, "attacker_train"));
      run.local_ptb.push_back(local_perturbation_rates(g.adjacency, run.plan.adjacency,
                                                       reference_train, "reference_train"));

      if (g.labels) {
        for (const std::string& dname : defenses) {
          EvaluationConfig ec;
          ec.defense = parse_defense(dname);
          ec.trials = resolved.at("trials").get<std::size_t>();
          ec.seed = derive_seed(seed, {kEvaluationTag, ri});
          ec.eta = eta;
          ec.gcn = gcn_config_from_json(resolved.at("gcn"));
          ec.train_fraction = resolved.at("split").at("train_fraction").get<double>();
          ec.val_fraction = resolved.at("split").at("val_fraction").get<double>();
          ec.resplit = resolved.at("evaluation_split") == "random";
          ec.threads = threads;
          run.evaluations.emplace_back(dname, evaluate_poisoned(g, run.plan, ec));
        }
      }
      result.runs.push_back(std::move(run));
    }
  }
  return result;
}

std::vector<AttackSummaryRow> ExperimentResult::summary_rows() const {
  std::vector<AttackSummaryRow> rows;
  for (const ExperimentRun& run : runs)
    for (const auto& [defense, report] : run.evaluations)
      rows.push_back({run.attack, defense, run.rate, report.mean_misclassification(), report.std});
  return rows;
}

namespace {

json ptb_json(const LocalPtbReport& r) {
  return {{"set", r.set_name},
          {"global_rate", r.global_rate},
          {"inside_rate", r.inside_rate},
          {"adjacent_rate", r.adjacent_rate},
          {"total_flips", r.total_flips},
          {"clean_edges", r.clean_edges},
          {"inside_flips", r.inside_flips},
          {"inside_edges", r.inside_edges},
          {"adjacent_flips", r.adjacent_flips},
          {"adjacent_edges", r.adjacent_edges}};
}

}  // namespace

json ExperimentResult::report_json() const {
  json j;
  j["config"] = config;
  j["seed"] = config.at("seed");
  j["dataset"] = {{"n_nodes", n_nodes}, {"n_edges", n_edges}};
  if (clustering) {
    json scores = json::array();
    for (const KScore& s : clustering->scores) scores.push_back({{"k", s.k}, {"score", s.score}});
    j["clustering"] = {{"chosen_k", clustering->chosen_k}, {"scores", scores}};
  }
  json out_runs = json::array();
  for (const ExperimentRun& run : runs) {
    json r;
    r["attack"] = run.attack;
    r["rate"] = run.rate;
    r["plan"] = plan_to_json(run.plan);
    r["local_ptb"] = json::array();
    for (const auto& p : run.local_ptb) r["local_ptb"].push_back(ptb_json(p));
    r["evaluations"] = json::object();
    for (const auto& [defense, report] : run.evaluations) r["evaluations"][defense] = report.to_json();
    out_runs.push_back(std::move(r));
  }
  j["runs"] = std::move(out_runs);
  return j;
}

std::string ExperimentResult::results_csv() const {
  std::ostringstream out;
  out << csv_config_line(config);
  out << "attack,defense,rate,budget,n_flips,violations,mean_accuracy,std_accuracy,"
         "mean_misclassification,std_misclassification\n";
  for (const ExperimentRun& run : runs)
    for (const auto& [defense, report] : run.evaluations)
      out << run.attack << "," << defense << "," << fmt_double(run.rate, 4) << ","
          << run.plan.budget << "," << run.plan.flips.size() << "," << run.plan.violations() << ","
          << fmt_double(report.mean) << "," << fmt_double(report.std) << ","
          << fmt_double(report.mean_misclassification()) << "," << fmt_double(report.std) << "\n";
  return out.str();
}

std::string ExperimentResult::local_ptb_csv(const std::string& attack) const {
  std::ostringstream out;
  out << csv_config_line(config);
  out << "attack,rate,set,global_rate,inside_rate,adjacent_rate,total_flips,clean_edges,"
         "inside_flips,inside_edges,adjacent_flips,adjacent_edges\n";
  for (const ExperimentRun& run : runs) {
    if (run.attack != attack) continue;
    for (const LocalPtbReport& r : run.local_ptb)
      out << attack << "," << fmt_double(run.rate, 4) << "," << r.set_name << ","
          << fmt_double(r.global_rate) << "," << fmt_double(r.inside_rate) << ","
          << fmt_double(r.adjacent_rate) << "," << r.total_flips << "," << r.clean_edges << ","
          << r.inside_flips << "," << r.inside_edges << "," << r.adjacent_flips << ","
          << r.adjacent_edges << "\n";
  }
  return out.str();
}

std::string ExperimentResult::ranking_csv() const {
  return bbga::ranking_csv(rank_attacks(summary_rows()), "config=" + config.dump());
}

std::vector<std::filesystem::path> write_experiment(const ExperimentResult& result,
                                                    const std::filesystem::path& dir,
                                                    bool with_ranking) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    const auto path = dir / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path.string());
    f << text;
    written.push_back(path);
  };
  emit("report.json", result.report_json().dump(2) + "\n");
  emit("results.csv", result.results_csv());
  std::vector<std::string> attacks;
  for (const ExperimentRun& run : result.runs)
    if (std::find(attacks.begin(), attacks.end(), run.attack) == attacks.end())
      attacks.push_back(run.attack);
  for (const std::string& a : attacks) emit("local_ptb_" + a + ".csv", result.local_ptb_csv(a));
  if (with_ranking) emit("ranking.csv", result.ranking_csv());
  return written;
}

std::vector<AttackSummaryRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path.string());
  std::vector<AttackSummaryRow> rows;
  std::string line;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 10)
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 10 columns");
    try {
      rows.push_back({cells[0], cells[1], std::stod(cells[2]), std::stod(cells[8]),
                      std::stod(cells[9])});
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  return rows;
}

}  // namespace bbga

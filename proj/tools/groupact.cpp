// Copyright 2026 The groupact Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// groupact: evaluation, synthetic data and toy-model ablations.
//
// Exit codes: 0 success, 1 parse or validation failure, 2 internal error,
// 3 training divergence. Set GROUPACT_LOG to error|warn|info|debug.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "groupact/eval.hpp"
#include "groupact/io.hpp"
#include "groupact/synth.hpp"
#include "groupact/trainer.hpp"

namespace fs = std::filesystem;
using groupact::io::Json;

namespace {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level log_level() {
  const char* env = std::getenv("GROUPACT_LOG");
  const std::string v = env ? env : "info";
  if (v == "error") return Level::Error;
  if (v == "warn") return Level::Warn;
  if (v == "debug") return Level::Debug;
  return Level::Info;
}

void log(Level l, const std::string& msg) {
  static const Level current = log_level();
  static const char* names[] = {"error", "warn", "info", "debug"};
  if (l <= current) std::cerr << "[" << names[static_cast<int>(l)] << "] " << msg << '\n';
}

void echo_config(const std::string& command, const Json& cfg) {
  std::cerr << "config " << command << ' ' << cfg.dump() << '\n';
}

groupact::Vocabulary vocabulary_from(const std::string& path) {
  return path.empty() ? groupact::io::default_vocabulary() : groupact::io::load_vocabulary(path);
}

std::ofstream create(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string gt, pred, vocab, out;
  double iou = 0.5;
  std::string difficulty = "E,M";
  std::string ap_style = "all-points";
  unsigned jobs = 1;
};

int run_eval(const EvalArgs& a) {
  const auto allowed = groupact::parse_difficulty_set(a.difficulty);
  echo_config("eval", {{"gt", a.gt},
                       {"pred", a.pred},
                       {"vocab", a.vocab.empty() ? "<default>" : a.vocab},
                       {"iou", a.iou},
                       {"difficulty", groupact::difficulty_label(allowed)},
                       {"ap_style", a.ap_style},
                       {"out", a.out},
                       {"jobs", a.jobs}});
  const auto vocab = vocabulary_from(a.vocab);
  const auto gts = groupact::io::load_ground_truth(a.gt, vocab);
  const auto preds = groupact::io::load_predictions(a.pred, vocab);
  log(Level::Info, "loaded " + std::to_string(gts.size()) + " ground-truth and " + std::to_string(preds.size()) +
                       " prediction frames");
  groupact::EvalOptions opt;
  opt.iou = a.iou;
  opt.allowed = allowed;
  opt.ap_style = groupact::parse_ap_style(a.ap_style);
  opt.jobs = a.jobs;
  const auto report = groupact::evaluate(gts, preds, opt);
  groupact::write_table(std::cout, report);
  if (!a.out.empty()) {
    auto out = create(a.out);
    groupact::write_key_values(out, report);
    log(Level::Info, "wrote " + a.out);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string spec, out, vocab;
  std::int64_t seed = -1;
  int scenes = 100;
  bool predictions = false;
  groupact::PerturbSpec perturb;
  unsigned jobs = 1;
};

int run_synth(const SynthArgs& a) {
  auto spec = a.spec.empty() ? groupact::SceneSpec{} : groupact::load_scene_spec(a.spec);
  if (a.seed >= 0) spec.seed = static_cast<std::uint64_t>(a.seed);
  Json cfg = {{"spec", groupact::to_json(spec)},
              {"out", a.out},
              {"scenes", a.scenes},
              {"vocab", a.vocab.empty() ? "<default>" : a.vocab},
              {"jobs", a.jobs}};
  if (a.predictions)
    cfg["predictions"] = {{"box_jitter", a.perturb.box_jitter},
                          {"group_error_rate", a.perturb.group_error_rate},
                          {"label_drop_rate", a.perturb.label_drop_rate},
                          {"spurious_rate", a.perturb.spurious_rate}};
  echo_config("synth", cfg);
  spec.validate();
  if (a.scenes < 1) throw groupact::ValidationError("synth: --scenes must be at least 1");
  const auto vocab = vocabulary_from(a.vocab);
  const auto scenes = groupact::generate_dataset(spec, vocab, a.scenes, a.jobs);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  {
    auto out = create(dir / "gt.jsonl");
    for (const auto& s : scenes) out << groupact::io::to_json(s.frame, vocab).dump() << '\n';
  }
  {
    auto out = create(dir / "features.jsonl");
    groupact::write_features(out, scenes);
  }
  {
    auto out = create(dir / "spec.json");
    out << groupact::to_json(spec).dump(2) << '\n';
  }
  if (a.predictions) {
    auto out = create(dir / "pred.jsonl");
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      auto p = a.perturb;
      p.seed = spec.seed * 1000003u + i;
      out << groupact::io::to_json(groupact::perturb_predictions(scenes[i].frame, vocab, p), vocab).dump() << '\n';
    }
  }
  std::size_t groups = 0, singletons = 0;
  for (const auto& s : scenes)
    for (const auto& [g, size] : groupact::group_sizes(groupact::group_ids(s.frame))) {
      ++groups;
      singletons += size == 1;
    }
  log(Level::Info, "wrote " + std::to_string(scenes.size()) + " scenes, " + std::to_string(groups) +
                       " groups, singleton share " + groupact::format4(static_cast<double>(singletons) / groups));
  return 0;
}

// ---------------------------------------------------------------------------

groupact::AblationConfig parse_ablation_config(const Json& j, const std::string& source) {
  static const std::set<std::string> known = {"table", "variants", "seeds", "train_scenes", "test_scenes",
                                              "scene", "train", "epochs"};
  static const std::set<std::string> known_train = {"grouping_epochs", "total_epochs", "lr", "head_lr",
                                                    "action_lr", "clip_norm", "joint_cardinality",
                                                    "plateau_patience", "plateau_factor", "alpha", "beta"};
  auto fail = [&](const std::string& field, const std::string& what) -> groupact::ParseError {
    return groupact::ParseError(source + ":1: " + field + ": " + what);
  };
  if (!j.is_object()) throw fail("config", "expected an object");
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw fail(k, "unknown field");

  groupact::AblationConfig cfg;
  try {
    const std::string table = j.value("table", std::string("grouping"));
    if (table == "grouping") {
      cfg.variants = groupact::grouping_ablation_variants();
      cfg.metric = groupact::AblationMetric::GroupingAP;
    } else if (table == "action") {
      cfg.variants = groupact::action_ablation_variants();
      cfg.metric = groupact::AblationMetric::ActionMAP;
    } else {
      throw fail("table", "expected \"grouping\" or \"action\"");
    }
    if (j.contains("variants")) {
      cfg.variants.clear();
      for (const auto& name : j.at("variants")) cfg.variants.push_back(groupact::find_variant(name.get<std::string>()));
    }
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    cfg.train_scenes = j.value("train_scenes", cfg.train_scenes);
    cfg.test_scenes = j.value("test_scenes", cfg.test_scenes);
    if (j.contains("scene")) cfg.scene = groupact::parse_scene_spec(j.at("scene"), source);
    if (j.contains("epochs")) cfg.train.grouping_epochs = cfg.train.total_epochs = j.at("epochs").get<int>();
    if (j.contains("train")) {
      const auto& t = j.at("train");
      for (const auto& [k, v] : t.items())
        if (!known_train.count(k)) throw fail("train." + k, "unknown field");
      cfg.train.grouping_epochs = t.value("grouping_epochs", cfg.train.grouping_epochs);
      cfg.train.total_epochs = t.value("total_epochs", cfg.train.total_epochs);
      cfg.train.lr = t.value("lr", cfg.train.lr);
      cfg.train.head_lr = t.value("head_lr", cfg.train.head_lr);
      cfg.train.action_lr = t.value("action_lr", cfg.train.action_lr);
      cfg.train.joint_cardinality = t.value("joint_cardinality", cfg.train.joint_cardinality);
      cfg.train.clip_norm = t.value("clip_norm", cfg.train.clip_norm);
      cfg.train.plateau_patience = t.value("plateau_patience", cfg.train.plateau_patience);
      cfg.train.plateau_factor = t.value("plateau_factor", cfg.train.plateau_factor);
      cfg.train.eig.alpha = t.value("alpha", cfg.train.eig.alpha);
      cfg.train.eig.beta = t.value("beta", cfg.train.eig.beta);
    }
  } catch (const nlohmann::json::exception& e) {
    throw fail("config", e.what());
  }
  if (cfg.seeds.size() < 5) throw groupact::ValidationError(source + ": seeds: at least five seeds are required");
  if (cfg.train_scenes < 1 || cfg.test_scenes < 1) throw groupact::ValidationError(source + ": scene counts must be positive");
  if (cfg.train.grouping_epochs < 0 || cfg.train.total_epochs < 0)
    throw groupact::ValidationError(source + ": epochs must be non-negative");
  if (!(cfg.train.lr > 0) || !(cfg.train.head_lr > 0) || !(cfg.train.action_lr > 0))
    throw groupact::ValidationError(source + ": learning rates must be positive");
  cfg.scene.validate();
  return cfg;
}

Json to_json(const groupact::AblationConfig& c) {
  Json variants = Json::array();
  for (const auto& v : c.variants) variants.push_back(v.name);
  return {{"metric", c.metric == groupact::AblationMetric::GroupingAP ? "grouping_ap" : "action_map"},
          {"variants", variants},
          {"seeds", c.seeds},
          {"train_scenes", c.train_scenes},
          {"test_scenes", c.test_scenes},
          {"scene", groupact::to_json(c.scene)},
          {"train",
           {{"grouping_epochs", c.train.grouping_epochs},
            {"total_epochs", c.train.total_epochs},
            {"lr", c.train.lr},
            {"head_lr", c.train.head_lr},
            {"action_lr", c.train.action_lr},
            {"clip_norm", c.train.clip_norm},
            {"joint_cardinality", c.train.joint_cardinality},
            {"plateau_patience", c.train.plateau_patience},
            {"plateau_factor", c.train.plateau_factor},
            {"alpha", c.train.eig.alpha},
            {"beta", c.train.eig.beta}}},
          {"jobs", c.jobs}};
}

struct TrainArgs {
  std::string config, out, vocab;
  unsigned jobs = 1;
};

int run_train(const TrainArgs& a) {
  std::ifstream in(a.config);
  if (!in) throw groupact::ParseError(a.config + ":0: file: cannot open");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw groupact::ParseError(a.config + ":1: json: " + e.what());
  }
  auto cfg = parse_ablation_config(j, a.config);
  cfg.jobs = a.jobs;
  Json echoed = to_json(cfg);
  echoed["out"] = a.out;
  echoed["vocab"] = a.vocab.empty() ? "<default>" : a.vocab;
  echo_config("train-toy", echoed);

  const auto vocab = vocabulary_from(a.vocab);
  const auto result = groupact::ablation_run(vocab, cfg);
  const fs::path dir(a.out);
  {
    auto out = create(dir / "ablation.csv");
    groupact::write_ablation_csv(out, result);
  }
  {
    auto out = create(dir / "loss_curves.csv");
    groupact::write_loss_csv(out, result, cfg);
  }
  groupact::write_ablation_csv(std::cout, result);
  log(Level::Info, "wrote " + (dir / "ablation.csv").string());
  return 0;
}

// ---------------------------------------------------------------------------

// Pretty-prints a key=value report written by `eval --out`.
int run_report(const std::string& path) {
  echo_config("report", {{"in", path}});
  std::ifstream in(path);
  if (!in) throw groupact::ParseError(path + ":0: file: cannot open");
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw groupact::ParseError(path + ":" + std::to_string(n) + ": line: expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  groupact::EvalReport r;
  auto number = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw groupact::ParseError(path + ":0: " + key + ": missing");
    if (it->second == "nan") return std::nan("");
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw groupact::ParseError(path + ":0: " + key + ": not a number");
    }
  };
  r.difficulty_filter = groupact::parse_difficulty_set(kv.count("difficulty") ? kv["difficulty"] : "E,M");
  for (int b = 0; b < groupact::kBuckets; ++b) {
    const double v = number(std::string("grouping_ap.") + groupact::bucket_name(b));
    r.grouping.nonempty[static_cast<std::size_t>(b)] = !std::isnan(v);
    r.grouping.bucket[static_cast<std::size_t>(b)] = std::isnan(v) ? 0.0 : v;
  }
  r.grouping.overall = number("grouping_ap.overall");
  r.action_map = number("action_map");
  r.gact_map1 = number("gact_map1");
  r.gact_map2 = number("gact_map2");
  auto counts = [&](const std::string& name) {
    return groupact::Counts{static_cast<std::int64_t>(number(name + ".tp")),
                            static_cast<std::int64_t>(number(name + ".fp")),
                            static_cast<std::int64_t>(number(name + ".fn"))};
  };
  r.action_counts = counts("action");
  r.grouping_counts = counts("grouping");
  r.gact1_counts = counts("gact1");
  r.gact2_counts = counts("gact2");
  groupact::write_table(std::cout, r);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"groupact: social group and activity evaluation, synthesis and toy ablations"};
  app.require_subcommand(1);
  unsigned jobs = 1;
  app.add_option("--jobs", jobs, "Worker thread cap")->check(CLI::Range(1u, 256u));

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Evaluate predictions against ground truth");
  eval->add_option("--gt", ea.gt, "Ground-truth JSONL")->required();
  eval->add_option("--pred", ea.pred, "Prediction JSONL")->required();
  eval->add_option("--vocab", ea.vocab, "Vocabulary JSON (default: built-in)");
  eval->add_option("--iou", ea.iou, "Box IoU threshold")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--difficulty", ea.difficulty, "Allowed difficulty tags: E | E,M | E,M,D");
  eval->add_option("--ap-style", ea.ap_style, "all-points | 11-point")
      ->check(CLI::IsMember({"all-points", "11-point"}));
  eval->add_option("--out", ea.out, "Write the key=value report here");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate synthetic scenes");
  synth->add_option("--spec", sa.spec, "SceneSpec JSON (default: built-in)");
  synth->add_option("--out", sa.out, "Output directory")->required();
  synth->add_option("--seed", sa.seed, "Override the scene spec seed");
  synth->add_option("--scenes", sa.scenes, "Number of scenes");
  synth->add_option("--vocab", sa.vocab, "Vocabulary JSON (default: built-in)");
  synth->add_flag("--predictions", sa.predictions, "Also write corrupted predictions (pred.jsonl)");
  synth->add_option("--box-jitter", sa.perturb.box_jitter, "Prediction box jitter");
  synth->add_option("--group-error", sa.perturb.group_error_rate, "Prediction group error rate");
  synth->add_option("--label-drop", sa.perturb.label_drop_rate, "Prediction label drop rate");
  synth->add_option("--spurious", sa.perturb.spurious_rate, "Prediction spurious label rate");

  TrainArgs ta;
  auto* train = app.add_subcommand("train-toy", "Run a toy-model ablation");
  train->add_option("--config", ta.config, "Experiment JSON")->required();
  train->add_option("--out", ta.out, "Output directory")->required();
  train->add_option("--vocab", ta.vocab, "Vocabulary JSON (default: built-in)");

  std::string report_in;
  auto* report = app.add_subcommand("report", "Print a key=value report as a table");
  report->add_option("--in", report_in, "Report written by eval --out")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*eval) {
      ea.jobs = jobs;
      return run_eval(ea);
    }
    if (*synth) {
      sa.jobs = jobs;
      return run_synth(sa);
    }
    if (*train) {
      ta.jobs = jobs;
      return run_train(ta);
    }
    if (*report) return run_report(report_in);
  } catch (const groupact::DivergenceError& e) {
    log(Level::Error, e.what());
    return 3;
  } catch (const groupact::Error& e) {
    log(Level::Error, e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    log(Level::Error, e.what());
    return 1;
  } catch (const std::exception& e) {
    log(Level::Error, std::string("internal error: ") + e.what());
    return 2;
  }
  return 2;
}

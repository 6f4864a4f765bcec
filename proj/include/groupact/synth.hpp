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

// Seeded synthetic scenes: social groups drawn from a size distribution,
// spatially clustered boxes, and person embeddings whose within-group cosine
// similarity exceeds the between-group one by a controllable margin.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "groupact/io.hpp"
#include "groupact/types.hpp"

namespace groupact {

/// Stand-in for the video backbone output of one key-frame.
struct SceneFeatures {
  Eigen::MatrixXd embeddings;  ///< one row per person
  std::vector<BoundingBox> boxes;

  Eigen::Index people() const { return embeddings.rows(); }
  Eigen::Index dim() const { return embeddings.cols(); }
};

struct Scene {
  SceneFeatures features;
  AnnotatedKeyFrame frame;
};

struct SceneSpec {
  int n_people = 30;
  /// Probability of a group having 1, 2, ... members.
  std::vector<double> group_size_distribution{0.755, 0.166, 0.05, 0.012, 0.009, 0.004, 0.002, 0.002};
  double image_width = 1920;
  double image_height = 480;
  double box_width = 60;
  double box_height = 160;
  double cluster_spread = 40;  ///< std-dev of member offsets from the group centre, pixels
  int embedding_dim = 32;
  double margin = 1.0;           ///< scale of the shared group direction
  double action_strength = 0.8;  ///< scale of the label prototypes
  double noise = 0.6;            ///< per-embedding noise norm (expected)
  double frequency_temper = 0.5; ///< labels drawn with p proportional to count^temper
  double shared_interaction_rate = 0.6;
  double own_interaction_rate = 0.3;
  std::uint64_t prototype_seed = 7;  ///< fixes label prototypes across datasets
  std::uint64_t seed = 1;

  /// Throws ValidationError for an infeasible spec.
  void validate() const {
    if (n_people < 1) throw ValidationError("scene spec: n_people must be at least 1");
    if (group_size_distribution.empty()) throw ValidationError("scene spec: empty group size distribution");
    double sum = 0;
    for (double p : group_size_distribution) {
      if (!(p >= 0)) throw ValidationError("scene spec: negative group size probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw ValidationError("scene spec: group size distribution must sum to 1");
    if (!(noise >= 0)) throw ValidationError("scene spec: noise must be non-negative");
    if (embedding_dim < 1) throw ValidationError("scene spec: embedding_dim must be positive");
    if (!(image_width > box_width && image_height > box_height && box_width > 0 && box_height > 0))
      throw ValidationError("scene spec: boxes must fit the image");
    if (!(cluster_spread >= 0 && margin >= 0 && action_strength >= 0))
      throw ValidationError("scene spec: layout parameters must be non-negative");
    auto rate = [](double r) { return r >= 0 && r <= 1; };
    if (!rate(shared_interaction_rate) || !rate(own_interaction_rate))
      throw ValidationError("scene spec: rates must be in [0,1]");
  }
};

inline io::Json to_json(const SceneSpec& s) {
  return {{"n_people", s.n_people},
          {"group_size_distribution", s.group_size_distribution},
          {"image_width", s.image_width},
          {"image_height", s.image_height},
          {"box_width", s.box_width},
          {"box_height", s.box_height},
          {"cluster_spread", s.cluster_spread},
          {"embedding_dim", s.embedding_dim},
          {"margin", s.margin},
          {"action_strength", s.action_strength},
          {"noise", s.noise},
          {"frequency_temper", s.frequency_temper},
          {"shared_interaction_rate", s.shared_interaction_rate},
          {"own_interaction_rate", s.own_interaction_rate},
          {"prototype_seed", s.prototype_seed},
          {"seed", s.seed}};
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline SceneSpec parse_scene_spec(const io::Json& j, const std::string& source = "<spec>") {
  if (!j.is_object()) throw ParseError(source + ":1: spec: expected an object");
  SceneSpec s;
  const io::Json defaults = to_json(s);
  for (const auto& [key, value] : j.items())
    if (!defaults.contains(key)) throw ParseError(source + ":1: " + key + ": unknown field");
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    get("n_people", s.n_people);
    get("group_size_distribution", s.group_size_distribution);
    get("image_width", s.image_width);
    get("image_height", s.image_height);
    get("box_width", s.box_width);
    get("box_height", s.box_height);
    get("cluster_spread", s.cluster_spread);
    get("embedding_dim", s.embedding_dim);
    get("margin", s.margin);
    get("action_strength", s.action_strength);
    get("noise", s.noise);
    get("frequency_temper", s.frequency_temper);
    get("shared_interaction_rate", s.shared_interaction_rate);
    get("own_interaction_rate", s.own_interaction_rate);
    get("prototype_seed", s.prototype_seed);
    get("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source + ":1: spec: " + e.what());
  }
  return s;
}

inline SceneSpec load_scene_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ":0: file: cannot open");
  io::Json j;
  try {
    j = io::Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ":1: json: " + e.what());
  }
  return parse_scene_spec(j, path);
}

/// Draws `count` group sizes from the distribution.
inline std::vector<int> sample_group_sizes(const std::vector<double>& distribution, int count,
                                           std::mt19937_64& rng) {
  std::discrete_distribution<int> pick(distribution.begin(), distribution.end());
  std::vector<int> sizes(static_cast<std::size_t>(std::max(count, 0)));
  for (auto& s : sizes) s = pick(rng) + 1;
  return sizes;
}

namespace detail {

inline Eigen::VectorXd random_unit(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Eigen::VectorXd v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = n01(rng);
  } while (v.norm() < 1e-9);
  return v.normalized();
}

inline Eigen::MatrixXd label_prototypes(std::size_t labels, int dim, std::uint64_t seed) {
  std::seed_seq seq{seed, std::uint64_t{0x70726f746f}};
  std::mt19937_64 rng(seq);
  Eigen::MatrixXd p(static_cast<Eigen::Index>(labels), dim);
  for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i) = random_unit(dim, rng).transpose();
  return p;
}

inline std::vector<double> tempered_weights(const Vocabulary& vocab, const std::vector<LabelId>& ids,
                                            double temper) {
  std::vector<double> w;
  for (LabelId l : ids) w.push_back(std::pow(static_cast<double>(vocab.frequency(l)), temper));
  return w;
}

inline Difficulty draw_difficulty(std::mt19937_64& rng) {
  std::discrete_distribution<int> d({0.6, 0.3, 0.1});
  return static_cast<Difficulty>(d(rng) + 1);
}

}  // namespace detail

/// One synthetic key-frame. Groups are sampled until `n_people` is reached;
/// the last group is cut short if it does not fit. Every person gets one pose
/// label; groups of two or more may share an interaction, and any person may
/// carry one more of their own. Labels with zero count are never drawn.
inline Scene generate_scene(const SceneSpec& spec, const Vocabulary& vocab, const std::string& frame_id = "scene") {
  spec.validate();
  std::seed_seq seq{spec.seed, std::uint64_t{0x7363656e65}};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u01;

  auto with_samples = [&](std::vector<LabelId> ids) {
    std::erase_if(ids, [&](LabelId l) { return vocab.frequency(l) <= 0; });
    return ids;
  };
  const auto pose_ids = with_samples(vocab.labels_in(Category::Pose));
  const auto inter_ids = with_samples(vocab.interaction_labels());
  if (pose_ids.empty()) throw ValidationError("generate_scene: vocabulary has no pose labels with samples");
  const auto pw = detail::tempered_weights(vocab, pose_ids, spec.frequency_temper);
  const auto iw = detail::tempered_weights(vocab, inter_ids, spec.frequency_temper);
  std::discrete_distribution<std::size_t> pose_pick(pw.begin(), pw.end());
  std::discrete_distribution<std::size_t> inter_pick(iw.begin(), iw.end());
  const Eigen::MatrixXd proto = detail::label_prototypes(vocab.size(), spec.embedding_dim, spec.prototype_seed);

  std::vector<int> sizes;
  for (int placed = 0; placed < spec.n_people;) {
    int s = sample_group_sizes(spec.group_size_distribution, 1, rng)[0];
    s = std::min(s, spec.n_people - placed);
    sizes.push_back(s);
    placed += s;
  }

  Scene scene;
  scene.frame.frame_id = frame_id;
  const auto n = static_cast<Eigen::Index>(spec.n_people);
  scene.features.embeddings.resize(n, spec.embedding_dim);
  const double noise_scale = spec.noise / std::sqrt(static_cast<double>(spec.embedding_dim));
  Eigen::Index row = 0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const GroupId gid = static_cast<GroupId>(g + 1);
    const Eigen::VectorXd direction = detail::random_unit(spec.embedding_dim, rng);
    const double cx = spec.box_width / 2 + u01(rng) * (spec.image_width - spec.box_width);
    const double cy = spec.box_height / 2 + u01(rng) * (spec.image_height - spec.box_height);
    const Difficulty group_difficulty = detail::draw_difficulty(rng);
    std::vector<LabelId> shared;
    if (sizes[g] >= 2 && !inter_ids.empty() && u01(rng) < spec.shared_interaction_rate)
      shared.push_back(inter_ids[inter_pick(rng)]);

    for (int m = 0; m < sizes[g]; ++m, ++row) {
      PersonGT p;
      p.track_id = static_cast<int>(row) + 1;
      const double w = spec.box_width * std::exp(0.1 * n01(rng));
      const double h = spec.box_height * std::exp(0.1 * n01(rng));
      const double px = std::clamp(cx + spec.cluster_spread * n01(rng) - w / 2, 0.0, spec.image_width - w);
      const double py = std::clamp(cy + 0.25 * spec.cluster_spread * n01(rng) - h / 2, 0.0, spec.image_height - h);
      p.box = {px, py, w, h};
      p.pose = {pose_ids[pose_pick(rng)], detail::draw_difficulty(rng), false};
      std::vector<LabelId> mine = shared;
      if (!inter_ids.empty() && u01(rng) < spec.own_interaction_rate) {
        const LabelId extra = inter_ids[inter_pick(rng)];
        if (std::find(mine.begin(), mine.end(), extra) == mine.end()) mine.push_back(extra);
      }
      for (LabelId l : mine) p.interactions.push_back({l, detail::draw_difficulty(rng), false});
      p.group_id = gid;
      p.group_difficulty = group_difficulty;

      Eigen::VectorXd e = spec.margin * direction + spec.action_strength * proto.row(p.pose.label).transpose();
      for (LabelId l : mine) e += spec.action_strength * proto.row(l).transpose();
      for (int k = 0; k < spec.embedding_dim; ++k) e[k] += noise_scale * n01(rng);
      scene.features.embeddings.row(row) = e.transpose();
      scene.features.boxes.push_back(p.box);
      scene.frame.persons.push_back(std::move(p));
    }
  }
  validate(scene.frame, vocab);
  return scene;
}

/// `count` scenes with per-scene seeds derived from `spec.seed`, generated on
/// up to `jobs` threads. Frame ids are "<prefix><index>".
inline std::vector<Scene> generate_dataset(const SceneSpec& spec, const Vocabulary& vocab, int count,
                                           unsigned jobs = 1, const std::string& prefix = "scene_") {
  spec.validate();
  if (count < 0) throw std::invalid_argument("generate_dataset: negative count");
  std::vector<Scene> out(static_cast<std::size_t>(count));
  std::seed_seq seq{spec.seed, std::uint64_t{0x64617461}};
  std::vector<std::uint64_t> seeds(out.size());
  {
    std::mt19937_64 rng(seq);
    for (auto& s : seeds) s = rng();
  }
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < out.size(); i += step) {
      SceneSpec local = spec;
      local.seed = seeds[i];
      out[i] = generate_scene(local, vocab, prefix + std::to_string(i));
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max(count, 1))));
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(work, t, jobs);
    for (auto& t : pool) t.join();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prediction corruption

struct PerturbSpec {
  double box_jitter = 0;        ///< offset std-dev as a fraction of box size
  double group_error_rate = 0;  ///< chance a person joins another person's group
  double label_drop_rate = 0;   ///< chance a true label gets a low score
  double spurious_rate = 0;     ///< chance of one extra wrong label per person
  std::uint64_t seed = 1;
};

inline void validate(const PerturbSpec& p) {
  auto rate = [](double r) { return r >= 0 && r <= 1; };
  if (!(p.box_jitter >= 0) || !rate(p.group_error_rate) || !rate(p.label_drop_rate) || !rate(p.spurious_rate))
    throw std::invalid_argument("perturb_predictions: rates must be in [0,1] and jitter non-negative");
}

/// Predictions derived from ground truth with controlled corruption. Box
/// scores fall with the jitter distance relative to the box diagonal.
/// All rates zero gives a perfect prediction of every task.
inline PredictedKeyFrame perturb_predictions(const AnnotatedKeyFrame& frame, const Vocabulary& vocab,
                                             const PerturbSpec& spec) {
  validate(spec);
  std::seed_seq seq{spec.seed, std::uint64_t{0x7065727475}};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u01;

  PredictedKeyFrame out;
  out.frame_id = frame.frame_id;
  for (const auto& g : frame.persons) {
    PersonPred p;
    const double dx = spec.box_jitter * g.box.w * n01(rng);
    const double dy = spec.box_jitter * g.box.h * n01(rng);
    p.box = {g.box.x + dx, g.box.y + dy, g.box.w, g.box.h};
    const double diag = std::hypot(g.box.w, g.box.h);
    p.score = std::clamp(1.0 - std::hypot(dx, dy) / diag, 0.0, 1.0);
    for (const auto& l : g.all_labels()) {
      const bool dropped = u01(rng) < spec.label_drop_rate;
      p.action_scores[l.label] = dropped ? 0.49 * u01(rng) : 1.0 - 0.49 * (spec.label_drop_rate > 0 ? u01(rng) : 0.0);
    }
    if (u01(rng) < spec.spurious_rate) {
      const auto l = static_cast<LabelId>(std::uniform_int_distribution<std::size_t>(0, vocab.size() - 1)(rng));
      if (!p.action_scores.count(l)) p.action_scores[l] = u01(rng);
    }
    p.group_id = g.group_id;
    out.persons.push_back(std::move(p));
  }

  const auto original = group_ids(frame);
  const auto n = out.persons.size();
  if (spec.group_error_rate > 0) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (u01(rng) >= spec.group_error_rate) continue;
      std::vector<std::size_t> others;
      for (std::size_t j = 0; j < n; ++j)
        if (original[j] != original[i]) others.push_back(j);
      if (others.empty()) continue;
      const auto j = others[std::uniform_int_distribution<std::size_t>(0, others.size() - 1)(rng)];
      out.persons[i].group_id = out.persons[j].group_id;
      changed = true;
    }
    // Corruption must not collapse to a relabelling of the truth.
    if (changed && dense_group_index(group_ids(out)) == dense_group_index(original)) {
      for (std::size_t j = 1; j < n; ++j)
        if (original[j] != original[0]) {
          out.persons[j].group_id = out.persons[0].group_id;
          break;
        }
    }
  }
  validate(out, vocab);
  return out;
}

/// Ground truth as a prediction: same boxes, unit scores, same groups.
inline PredictedKeyFrame perfect_predictions(const AnnotatedKeyFrame& frame, const Vocabulary& vocab) {
  return perturb_predictions(frame, vocab, {});
}

// ---------------------------------------------------------------------------
// Features file: one JSON object per line, {"frame_id", "boxes", "embeddings"}.

inline io::Json to_json(const SceneFeatures& f, const std::string& frame_id) {
  io::Json boxes = io::Json::array();
  for (const auto& b : f.boxes) boxes.push_back(io::detail::box(b));
  io::Json emb = io::Json::array();
  for (Eigen::Index i = 0; i < f.embeddings.rows(); ++i) {
    io::Json row = io::Json::array();
    for (Eigen::Index k = 0; k < f.embeddings.cols(); ++k) row.push_back(f.embeddings(i, k));
    emb.push_back(std::move(row));
  }
  return {{"frame_id", frame_id}, {"boxes", std::move(boxes)}, {"embeddings", std::move(emb)}};
}

inline void write_features(std::ostream& out, const std::vector<Scene>& scenes) {
  for (const auto& s : scenes) out << to_json(s.features, s.frame.frame_id).dump() << '\n';
}

/// Reads a features file; ids are returned in file order.
inline std::vector<std::pair<std::string, SceneFeatures>> read_features(std::istream& in,
                                                                        const std::string& source) {
  std::vector<std::pair<std::string, SceneFeatures>> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = io::detail::parse_line(text, source, line);
    const io::detail::Cursor c{source, line};
    SceneFeatures f;
    const auto& boxes = c.array(c.member(j, "", "boxes"), "boxes");
    for (std::size_t i = 0; i < boxes.size(); ++i) f.boxes.push_back(c.box(boxes[i], "boxes[" + std::to_string(i) + "]"));
    const auto& emb = c.array(c.member(j, "", "embeddings"), "embeddings");
    if (emb.size() != boxes.size()) throw ParseError(source + ":" + std::to_string(line) + ": embeddings: one row per box required");
    const std::size_t dim = emb.empty() ? 0 : c.array(emb[0], "embeddings[0]").size();
    f.embeddings.resize(static_cast<Eigen::Index>(emb.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < emb.size(); ++i) {
      const std::string path = "embeddings[" + std::to_string(i) + "]";
      const auto& r = c.array(emb[i], path);
      if (r.size() != dim) throw ParseError(source + ":" + std::to_string(line) + ": " + path + ": ragged row");
      for (std::size_t k = 0; k < dim; ++k)
        f.embeddings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = c.number(r[k], path);
    }
    out.emplace_back(c.string(c.member(j, "", "frame_id"), "frame_id"), std::move(f));
  }
  return out;
}

}  // namespace groupact

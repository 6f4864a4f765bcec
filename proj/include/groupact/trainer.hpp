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

// A small differentiable model over synthetic person embeddings:
//
//   affinity    A(i,j) = sigmoid(w_v * D_V(h_i, h_j) + w_g * D_G(i, j) + b)
//   cardinality k      = u . [maxpool(h), (sum(A) - n) / n] + c
//   actions            one affine layer per partition over [h_i, maxpool(group of i)]
//
// trained in two stages (grouping loss, then grouping + action loss) with
// plain SGD over scenes and a learning rate that drops tenfold on plateau.
// Every metric comes from the evaluator in eval.hpp.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "groupact/eval.hpp"
#include "groupact/geometry.hpp"
#include "groupact/graph.hpp"
#include "groupact/inference.hpp"
#include "groupact/losses.hpp"
#include "groupact/synth.hpp"

namespace groupact {

/// A non-finite loss during training.
class DivergenceError : public Error {
 public:
  DivergenceError(int epoch, const std::string& stage)
      : Error("training diverged at epoch " + std::to_string(epoch) + " (" + stage + ")"), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// Visual similarity (cos + 1) / 2. Throws std::invalid_argument for a zero
/// vector or mismatched sizes.
inline double d_v(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw std::invalid_argument("d_v: dimension mismatch");
  const double na = a.norm(), nb = b.norm();
  if (na == 0 || nb == 0) throw std::invalid_argument("d_v: zero vector");
  return std::clamp((a.dot(b) / (na * nb) + 1) / 2, 0.0, 1.0);
}

struct PairCombiner {
  double w_visual = 0;
  double w_geo = 0;
  double bias = 0;

  double logit(double dv, double dg) const { return w_visual * dv + w_geo * dg + bias; }
  double operator()(double dv, double dg) const { return detail::sigmoid(logit(dv, dg)); }
};

/// Pairwise inputs of the combiner, computed once per scene.
struct PairInputs {
  Eigen::MatrixXd visual;  ///< D_V, unit diagonal
  Eigen::MatrixXd geo;     ///< D_G, unit diagonal
};

inline PairInputs pair_inputs(const SceneFeatures& scene) {
  const auto n = scene.people();
  if (static_cast<Eigen::Index>(scene.boxes.size()) != n)
    throw std::invalid_argument("pair_inputs: one box per embedding required");
  PairInputs p{Eigen::MatrixXd::Ones(n, n), pairwise_geometry_matrix(scene.boxes)};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      p.visual(i, j) = p.visual(j, i) = d_v(scene.embeddings.row(i).transpose(), scene.embeddings.row(j).transpose());
  return p;
}

inline SimilarityMatrix forward_similarity(const PairInputs& in, const PairCombiner& c) {
  const auto n = in.visual.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Ones(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) a(i, j) = a(j, i) = c(in.visual(i, j), in.geo(i, j));
  return SimilarityMatrix(std::move(a));
}

inline SimilarityMatrix forward_similarity(const SceneFeatures& scene, const PairCombiner& c) {
  return forward_similarity(pair_inputs(scene), c);
}

/// k = weights . [pooled embedding, affinity mass] + bias.
struct CardinalityHead {
  Eigen::VectorXd weights;  ///< embedding dim + 1
  double bias = 0;

  static CardinalityHead zeros(Eigen::Index dim) { return {Eigen::VectorXd::Zero(dim + 1), 0.0}; }

  double operator()(const Eigen::VectorXd& pooled, double mass) const {
    return weights.head(pooled.size()).dot(pooled) + weights[pooled.size()] * mass + bias;
  }
};

/// Off-diagonal affinity per person: (sum(A) - n) / n, the mean degree.
inline double affinity_mass(const SimilarityMatrix& a) {
  const auto n = static_cast<double>(a.n());
  return a.n() ? (a.values().sum() - n) / n : 0.0;
}

inline Eigen::VectorXd max_pool(const Eigen::MatrixXd& rows) { return rows.colwise().maxCoeff().transpose(); }

/// Per-person [h_i, max-pool of h over the members of i's group].
inline Eigen::MatrixXd group_pooled_features(const Eigen::MatrixXd& h, const std::vector<int>& groups) {
  const auto n = h.rows(), d = h.cols();
  if (static_cast<Eigen::Index>(groups.size()) != n) throw std::invalid_argument("group_pooled_features: size mismatch");
  std::map<int, Eigen::VectorXd> pooled;
  for (Eigen::Index i = 0; i < n; ++i) {
    auto [it, fresh] = pooled.emplace(groups[static_cast<std::size_t>(i)], h.row(i).transpose());
    if (!fresh) it->second = it->second.cwiseMax(h.row(i).transpose());
  }
  Eigen::MatrixXd out(n, 2 * d);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.row(i).head(d) = h.row(i);
    out.row(i).tail(d) = pooled.at(groups[static_cast<std::size_t>(i)]).transpose();
  }
  return out;
}

/// An affine layer per partition; the last weight column is the bias.
struct ActionModel {
  std::vector<Eigen::MatrixXd> pose;
  Eigen::VectorXd presence;
  std::vector<Eigen::MatrixXd> interaction;

  static ActionModel zeros(const PartitionScheme& s, Eigen::Index in_dim) {
    ActionModel m;
    for (const auto& p : s.pose) m.pose.push_back(Eigen::MatrixXd::Zero(p.slots(), in_dim + 1));
    m.presence = Eigen::VectorXd::Zero(in_dim + 1);
    for (const auto& p : s.interaction) m.interaction.push_back(Eigen::MatrixXd::Zero(p.slots(), in_dim + 1));
    return m;
  }

  ActionHeads logits(const Eigen::VectorXd& x) const {
    const auto d = x.size();
    ActionHeads h;
    for (const auto& w : pose) h.pose.push_back(w.leftCols(d) * x + w.col(d));
    h.presence = presence.head(d).dot(x) + presence[d];
    for (const auto& w : interaction) h.interaction.push_back(w.leftCols(d) * x + w.col(d));
    return h;
  }

  /// this -= lr * (dL/dlogits) x^T, for every head.
  void step(const ActionHeads& g, const Eigen::VectorXd& x, double lr) {
    const auto d = x.size();
    for (std::size_t p = 0; p < pose.size(); ++p) {
      pose[p].leftCols(d).noalias() -= lr * g.pose[p] * x.transpose();
      pose[p].col(d) -= lr * g.pose[p];
    }
    presence.head(d) -= lr * g.presence * x;
    presence[d] -= lr * g.presence;
    for (std::size_t p = 0; p < interaction.size(); ++p) {
      interaction[p].leftCols(d).noalias() -= lr * g.interaction[p] * x.transpose();
      interaction[p].col(d) -= lr * g.interaction[p];
    }
  }
};

// ---------------------------------------------------------------------------
// Variants

enum class GroupingObjective { Bce, BceEigen };
enum class CardinalityMode { Eigengap, Regression };
enum class ActionObjective { Flat, Weighted, Partitioned };

struct Variant {
  std::string name;
  GroupingObjective grouping = GroupingObjective::BceEigen;
  CardinalityMode cardinality = CardinalityMode::Regression;
  bool geo = true;
  ActionObjective action = ActionObjective::Partitioned;
};

/// Baseline1..Ours of the social grouping ablation.
inline std::vector<Variant> grouping_ablation_variants() {
  using G = GroupingObjective;
  using C = CardinalityMode;
  return {{"Baseline1", G::Bce, C::Eigengap, false, ActionObjective::Partitioned},
          {"Baseline2", G::Bce, C::Eigengap, true, ActionObjective::Partitioned},
          {"Baseline3", G::Bce, C::Regression, true, ActionObjective::Partitioned},
          {"Ours", G::BceEigen, C::Regression, true, ActionObjective::Partitioned}};
}

/// The three action-loss schemes, all on the full grouping model.
inline std::vector<Variant> action_ablation_variants() {
  using G = GroupingObjective;
  using C = CardinalityMode;
  return {{"CE+BCE", G::BceEigen, C::Regression, true, ActionObjective::Flat},
          {"W-CE+W-BCE", G::BceEigen, C::Regression, true, ActionObjective::Weighted},
          {"M-CE+M-BCE", G::BceEigen, C::Regression, true, ActionObjective::Partitioned}};
}

inline Variant find_variant(const std::string& name) {
  for (const auto& set : {grouping_ablation_variants(), action_ablation_variants()})
    for (const auto& v : set)
      if (v.name == name) return v;
  throw ValidationError("unknown variant '" + name + "'");
}

struct TrainConfig {
  int grouping_epochs = 30;  ///< stage 1: grouping loss only
  int total_epochs = 20;     ///< stage 2: grouping + action loss
  double lr = 0.5;           ///< pair combiner
  double head_lr = 0.1;      ///< cardinality head
  double action_lr = 0.5;    ///< action heads
  double clip_norm = 0.5;    ///< per-scene cap on each parameter group's gradient norm
  bool joint_cardinality = true;  ///< let the cardinality loss reach the combiner
  int plateau_patience = 4;
  double plateau_factor = 0.1;
  EigLossConfig eig;
  LossWeights action_weights;
  std::uint64_t seed = 1;
};

struct EpochLoss {
  int epoch = 0;  ///< global, over both stages
  int stage = 1;
  double loss = 0;
  double lr = 0;
};

struct ToyModel {
  Variant variant;
  PartitionScheme scheme;
  std::vector<double> class_weights;
  PairCombiner combiner;
  CardinalityHead cardinality;
  ActionModel actions;
  std::uint64_t cluster_seed = 1;
};

struct TrainResult {
  ToyModel model;
  std::vector<EpochLoss> curve;
};

namespace detail {

struct PreparedScene {
  const Scene* scene = nullptr;
  PairInputs pairs;
  SimilarityMatrix target;
  IndicatorBasis basis;
  int groups = 0;
  Eigen::VectorXd pooled;
  Eigen::MatrixXd action_inputs;
  std::vector<ActionTargets> targets;
};

inline PreparedScene prepare_scene(const Scene& s) {
  PreparedScene p;
  p.scene = &s;
  p.pairs = pair_inputs(s.features);
  const auto ids = group_ids(s.frame);
  p.target = adjacency_from_groups(ids);
  p.basis = indicator_basis(ids);
  p.groups = static_cast<int>(p.basis.components());
  p.pooled = max_pool(s.features.embeddings);
  p.action_inputs = group_pooled_features(s.features.embeddings, dense_group_index(ids));
  for (const auto& person : s.frame.persons) {
    ActionTargets t;
    t.pose = person.pose.label;
    for (const auto& l : person.interactions) t.interactions.push_back(l.label);
    p.targets.push_back(std::move(t));
  }
  return p;
}

struct GroupingStep {
  double loss = 0;
  Eigen::Vector3d grad_combiner = Eigen::Vector3d::Zero();  // w_v, w_g, b
  Eigen::VectorXd grad_head;                                // weights then bias
};

inline GroupingStep grouping_step(const ToyModel& m, const PreparedScene& p, const TrainConfig& cfg) {
  const auto a = forward_similarity(p.pairs, m.combiner);
  const auto n = a.n();
  const bool regress = m.variant.cardinality == CardinalityMode::Regression;
  const double mass = affinity_mass(a);
  const double k = regress ? m.cardinality(p.pooled, mass) : 0.0;
  GroupingTerms terms{true, m.variant.grouping == GroupingObjective::BceEigen, regress};
  const auto g = grouping_loss(a, p.target, p.basis, k, {p.groups}, cfg.eig, terms);

  GroupingStep out;
  out.loss = g.total;
  const auto dim = p.pooled.size();
  out.grad_head = Eigen::VectorXd::Zero(dim + 2);
  if (regress) {
    out.grad_head.head(dim) = g.grad_k * p.pooled;
    out.grad_head[dim] = g.grad_k * mass;
    out.grad_head[dim + 1] = g.grad_k;
  }
  // d mass / d A(i,j) for the shared pair value.
  const double mass_grad = regress && cfg.joint_cardinality ? g.grad_k * m.cardinality.weights[dim] * 2.0 / static_cast<double>(n) : 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double aij = a(i, j);
      const double dz = (g.grad_a(i, j) + mass_grad) * aij * (1 - aij);
      out.grad_combiner[0] += dz * p.pairs.visual(i, j);
      out.grad_combiner[1] += dz * p.pairs.geo(i, j);
      out.grad_combiner[2] += dz;
    }
  if (!m.variant.geo) out.grad_combiner[1] = 0;
  return out;
}

inline double action_step(ToyModel& m, const PreparedScene& p, const TrainConfig& cfg, double lr, bool update) {
  double total = 0;
  const auto n = p.action_inputs.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd x = p.action_inputs.row(i).transpose();
    const auto l = action_loss(m.actions.logits(x), p.targets[static_cast<std::size_t>(i)], m.scheme,
                               cfg.action_weights, m.class_weights);
    total += l.loss;
    if (update) m.actions.step(l.grad, x, lr / static_cast<double>(n));
  }
  return n ? total / static_cast<double>(n) : 0.0;
}

inline void apply_grouping(ToyModel& m, const GroupingStep& s, double lr, double head_lr, double clip) {
  auto scale = [clip](double norm) { return (clip > 0 && norm > clip) ? clip / norm : 1.0; };
  const Eigen::Vector3d dc = lr * scale(s.grad_combiner.norm()) * s.grad_combiner;
  m.combiner.w_visual -= dc[0];
  m.combiner.w_geo -= dc[1];
  m.combiner.bias -= dc[2];
  const auto dim = m.cardinality.weights.size();
  const double sh = head_lr * scale(s.grad_head.norm());
  m.cardinality.weights -= sh * s.grad_head.head(dim);
  m.cardinality.bias -= sh * s.grad_head[dim];
}

}  // namespace detail

inline ToyModel initial_model(const Variant& v, const Vocabulary& vocab, const std::vector<Scene>& train,
                              std::uint64_t seed) {
  if (train.empty()) throw std::invalid_argument("train: empty dataset");
  ToyModel m;
  m.variant = v;
  m.scheme = v.action == ActionObjective::Partitioned ? build_partitions(vocab) : flat_scheme(vocab);
  if (v.action == ActionObjective::Weighted) m.class_weights = inverse_frequency_weights(vocab);
  m.combiner = {1.0, v.geo ? 1.0 : 0.0, -1.0};
  const auto dim = train.front().features.dim();
  m.cardinality = CardinalityHead::zeros(dim);
  double mean_groups = 0;
  for (const auto& s : train) {
    int c = 0;
    dense_group_index(group_ids(s.frame), &c);
    mean_groups += c;
  }
  m.cardinality.bias = mean_groups / static_cast<double>(train.size());
  m.actions = ActionModel::zeros(m.scheme, 2 * dim);
  m.cluster_seed = seed;
  return m;
}

/// Two-stage training. Deterministic for a given seed; throws
/// DivergenceError when an epoch loss is not finite.
inline TrainResult train(const std::vector<Scene>& dataset, const Vocabulary& vocab, const Variant& variant,
                         const TrainConfig& cfg) {
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  TrainResult r;
  r.model = initial_model(variant, vocab, dataset, cfg.seed);
  auto& m = r.model;
  std::vector<detail::PreparedScene> prepared;
  prepared.reserve(dataset.size());
  for (const auto& s : dataset) prepared.push_back(detail::prepare_scene(s));

  std::seed_seq seq{cfg.seed, std::uint64_t{0x747261696e}};
  std::mt19937_64 rng(seq);
  std::vector<std::size_t> order(prepared.size());
  std::iota(order.begin(), order.end(), 0);

  int epoch = 0;
  for (int stage = 1; stage <= 2; ++stage) {
    const int epochs = stage == 1 ? cfg.grouping_epochs : cfg.total_epochs;
    double lr = cfg.lr, action_lr = cfg.action_lr, head_lr = cfg.head_lr;
    double best = std::numeric_limits<double>::infinity();
    int stale = 0;
    for (int e = 0; e < epochs; ++e, ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      double sum = 0;
      for (std::size_t idx : order) {
        const auto& p = prepared[idx];
        auto g = detail::grouping_step(m, p, cfg);
        double loss = g.loss;
        if (stage == 2) loss = total_loss(g.loss, detail::action_step(m, p, cfg, action_lr, true));
        if (!std::isfinite(loss)) throw DivergenceError(epoch, stage == 1 ? "grouping" : "total");
        detail::apply_grouping(m, g, lr, head_lr, cfg.clip_norm);
        // Caught here, a bad update would otherwise surface as an invalid
        // similarity matrix on the next scene.
        if (!std::isfinite(m.combiner.w_visual + m.combiner.w_geo + m.combiner.bias + m.cardinality.bias) ||
            !m.cardinality.weights.allFinite())
          throw DivergenceError(epoch, "parameters");
        sum += loss;
      }
      const double mean = sum / static_cast<double>(order.size());
      if (!std::isfinite(mean)) throw DivergenceError(epoch, stage == 1 ? "grouping" : "total");
      r.curve.push_back({epoch, stage, mean, lr});
      if (!std::isfinite(best) || mean < best - 1e-4 * std::abs(best)) {
        best = mean;
        stale = 0;
      } else if (++stale >= cfg.plateau_patience) {
        lr *= cfg.plateau_factor;
        action_lr *= cfg.plateau_factor;
        head_lr *= cfg.plateau_factor;
        stale = 0;
      }
    }
  }
  return r;
}

/// Predictions on ground-truth boxes (score 1): spectral clustering with the
/// variant's group count, then hierarchical label scores from features pooled
/// over the predicted groups.
inline PredictedKeyFrame predict(const ToyModel& m, const Scene& scene) {
  const auto a = forward_similarity(scene.features, m.combiner);
  const auto n = a.n();
  int k = 1;
  if (n > 0)
    k = m.variant.cardinality == CardinalityMode::Regression
            ? predict_k(m.cardinality(max_pool(scene.features.embeddings), affinity_mass(a)), n)
            : estimate_k_eigengap(a);
  const auto clusters = n > 0 ? spectral_cluster(a, k, m.cluster_seed) : ClusterAssignment{};
  const auto x = group_pooled_features(scene.features.embeddings, clusters.labels);

  PredictedKeyFrame out;
  out.frame_id = scene.frame.frame_id;
  for (Eigen::Index i = 0; i < n; ++i) {
    PersonPred p;
    p.box = scene.features.boxes[static_cast<std::size_t>(i)];
    p.score = 1.0;
    p.group_id = clusters.labels[static_cast<std::size_t>(i)] + 1;
    p.action_scores = hierarchical_label_scores(head_probabilities(m.actions.logits(x.row(i).transpose())), m.scheme);
    out.persons.push_back(std::move(p));
  }
  return out;
}

/// Evaluates a model on scenes with every difficulty level allowed.
inline EvalReport evaluate_model(const ToyModel& m, const std::vector<Scene>& scenes, unsigned jobs = 1) {
  std::vector<AnnotatedKeyFrame> gts;
  std::vector<PredictedKeyFrame> preds;
  for (const auto& s : scenes) {
    gts.push_back(s.frame);
    preds.push_back(predict(m, s));
  }
  EvalOptions opt;
  opt.allowed = {Difficulty::Easy, Difficulty::Moderate, Difficulty::Difficult};
  opt.jobs = jobs;
  return evaluate(gts, preds, opt);
}

// ---------------------------------------------------------------------------
// Ablation

enum class AblationMetric { GroupingAP, ActionMAP };

struct AblationConfig {
  std::vector<Variant> variants = grouping_ablation_variants();
  AblationMetric metric = AblationMetric::GroupingAP;
  SceneSpec scene;
  int train_scenes = 200;
  int test_scenes = 100;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  TrainConfig train;
  unsigned jobs = 1;
};

struct AblationRow {
  std::string variant;
  std::vector<double> per_seed;  ///< the selected metric
  std::vector<double> grouping_ap, action_map;
  double mean = 0;
  double stddev = 0;
};

struct AblationResult {
  std::vector<AblationRow> rows;
  /// Loss curves per (variant, seed), in row-major order.
  std::vector<std::vector<EpochLoss>> curves;
};

/// Trains every variant on every seed's dataset and reports the metric from
/// a held-out set of the same distribution. Requires at least five seeds.
inline AblationResult ablation_run(const Vocabulary& vocab, const AblationConfig& cfg) {
  if (cfg.seeds.size() < 5) throw std::invalid_argument("ablation_run: at least five seeds are required");
  if (cfg.variants.empty()) throw std::invalid_argument("ablation_run: no variants");
  AblationResult out;
  out.rows.resize(cfg.variants.size());
  for (std::size_t v = 0; v < cfg.variants.size(); ++v) out.rows[v].variant = cfg.variants[v].name;
  std::vector<std::vector<std::vector<EpochLoss>>> curves(cfg.variants.size());
  for (std::uint64_t seed : cfg.seeds) {
    SceneSpec train_spec = cfg.scene, test_spec = cfg.scene;
    train_spec.seed = seed * 2 + 0;
    test_spec.seed = seed * 2 + 1;
    const auto train_set = generate_dataset(train_spec, vocab, cfg.train_scenes, cfg.jobs, "train_");
    const auto test_set = generate_dataset(test_spec, vocab, cfg.test_scenes, cfg.jobs, "test_");
    for (std::size_t v = 0; v < cfg.variants.size(); ++v) {
      TrainConfig tc = cfg.train;
      tc.seed = seed;
      auto r = train(train_set, vocab, cfg.variants[v], tc);
      const auto report = evaluate_model(r.model, test_set, cfg.jobs);
      auto& row = out.rows[v];
      row.grouping_ap.push_back(report.grouping.overall);
      row.action_map.push_back(report.action_map);
      row.per_seed.push_back(cfg.metric == AblationMetric::GroupingAP ? report.grouping.overall : report.action_map);
      curves[v].push_back(std::move(r.curve));
    }
  }
  for (auto& row : out.rows) {
    const double n = static_cast<double>(row.per_seed.size());
    row.mean = std::accumulate(row.per_seed.begin(), row.per_seed.end(), 0.0) / n;
    double ss = 0;
    for (double x : row.per_seed) ss += (x - row.mean) * (x - row.mean);
    row.stddev = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  }
  for (auto& c : curves)
    for (auto& s : c) out.curves.push_back(std::move(s));
  return out;
}

inline void write_ablation_csv(std::ostream& out, const AblationResult& r) {
  out << "variant,mean,stddev,mean_grouping_ap,mean_action_map,per_seed\n";
  for (const auto& row : r.rows) {
    auto mean = [](const std::vector<double>& v) {
      return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    out << row.variant << ',' << format4(row.mean) << ',' << format4(row.stddev) << ','
        << format4(mean(row.grouping_ap)) << ',' << format4(mean(row.action_map)) << ',';
    for (std::size_t i = 0; i < row.per_seed.size(); ++i) out << (i ? ";" : "") << format4(row.per_seed[i]);
    out << '\n';
  }
}

inline void write_loss_csv(std::ostream& out, const AblationResult& r, const AblationConfig& cfg) {
  out << "variant,seed,epoch,stage,loss,lr\n";
  std::size_t idx = 0;  // curves are stored variant-major
  for (const auto& v : cfg.variants)
    for (std::uint64_t seed : cfg.seeds) {
      for (const auto& e : r.curves.at(idx)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.9g", e.loss);
        out << v.name << ',' << seed << ',' << e.epoch << ',' << e.stage << ',' << buf << ',' << e.lr << '\n';
      }
      ++idx;
    }
}

}  // namespace groupact

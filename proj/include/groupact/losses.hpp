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

// Training objectives for social grouping and partitioned action learning.
//
// Gradients with respect to an affinity matrix are taken per unordered pair:
// grad(i,j) == grad(j,i) is the derivative with respect to the shared value
// a_ij = a_ji, and the diagonal is zero because it is fixed at 1.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "groupact/graph.hpp"
#include "groupact/types.hpp"

namespace groupact {

inline constexpr double kProbEpsilon = 1e-7;

struct MatrixLoss {
  double loss = 0;
  Eigen::MatrixXd grad;
};

struct ScalarLoss {
  double loss = 0;
  double grad = 0;
};

struct EigLossConfig {
  double alpha = 1.0;
  double beta = 1.0;
};

struct CardinalityTarget {
  int gt_groups = 1;
};

// ---------------------------------------------------------------------------
// Grouping terms

/// Mean binary cross entropy over unordered off-diagonal pairs.
inline MatrixLoss bce_matrix_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& gt) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols() || pred.rows() != pred.cols())
    throw std::invalid_argument("bce_matrix_loss: shape mismatch");
  const auto n = pred.rows();
  MatrixLoss out{0, Eigen::MatrixXd::Zero(n, n)};
  const double pairs = static_cast<double>(n * (n - 1) / 2);
  if (pairs == 0) return out;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double raw = pred(i, j);
      const double p = std::clamp(raw, kProbEpsilon, 1 - kProbEpsilon);
      const double y = gt(i, j);
      out.loss -= y * std::log(p) + (1 - y) * std::log(1 - p);
      const bool clamped = raw < kProbEpsilon || raw > 1 - kProbEpsilon;
      const double g = clamped ? 0.0 : (-y / p + (1 - y) / (1 - p)) / pairs;
      out.grad(i, j) = out.grad(j, i) = g;
    }
  }
  out.loss /= pairs;
  return out;
}

inline MatrixLoss bce_matrix_loss(const SimilarityMatrix& pred, const SimilarityMatrix& gt) {
  return bce_matrix_loss(pred.values(), gt.values());
}

/// Maps a gradient with respect to the entries of L = D - A onto the pair
/// values of A.
inline Eigen::MatrixXd laplacian_grad_to_affinity(const Eigen::MatrixXd& grad_l) {
  const auto n = grad_l.rows();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      g(i, j) = g(j, i) = grad_l(i, i) + grad_l(j, j) - grad_l(i, j) - grad_l(j, i);
  return g;
}

/// Eigendecomposition-free spectral loss
///
///   sum_k e_k' L' L e_k + alpha * exp(-beta * tr(Lbar' Lbar)),
///   Lbar = L (I - E E'),
///
/// where the columns e_k of E span the ground-truth null space. The first
/// term vanishes exactly when every indicator column is in the null space of
/// L; the second keeps L = 0 from being a minimizer.
inline MatrixLoss eig_loss(const LaplacianMatrix& l, const IndicatorBasis& basis,
                           const EigLossConfig& cfg = {}) {
  const Eigen::MatrixXd& lv = l.values();
  const Eigen::MatrixXd& e = basis.vectors;
  if (e.rows() != lv.rows()) throw std::invalid_argument("eig_loss: dimension mismatch");
  const auto n = lv.rows();
  const Eigen::MatrixXd eet = e * e.transpose();
  const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(n, n) - eet;
  const Eigen::MatrixXd le = lv * e;
  const Eigen::MatrixXd lbar = lv * proj;
  const double null_term = le.squaredNorm();
  const double spread = lbar.squaredNorm();
  const double barrier = cfg.alpha * std::exp(-cfg.beta * spread);

  // d/dL ||L E||^2 = 2 L E E';  d/dL ||L P||^2 = 2 L P for the projector P.
  const Eigen::MatrixXd grad_l = 2.0 * lv * eet - 2.0 * cfg.beta * barrier * lbar;
  return {null_term + barrier, laplacian_grad_to_affinity(grad_l)};
}

inline ScalarLoss cardinality_mse(double pred_k, CardinalityTarget target) {
  const double d = pred_k - static_cast<double>(target.gt_groups);
  return {d * d, 2 * d};
}

struct GroupingTerms {
  bool bce = true;
  bool eig = true;
  bool mse = true;
};

struct GroupingLoss {
  double total = 0;
  double bce = 0;
  double eig = 0;
  double mse = 0;
  Eigen::MatrixXd grad_a;  ///< per pair
  double grad_k = 0;
};

/// Sum of the enabled grouping terms and of their gradients.
inline GroupingLoss grouping_loss(const SimilarityMatrix& a_pred, const SimilarityMatrix& a_gt,
                                  const IndicatorBasis& basis, double pred_k,
                                  CardinalityTarget target, const EigLossConfig& cfg = {},
                                  GroupingTerms terms = {}) {
  const auto n = a_pred.n();
  if (a_gt.n() != n) throw std::invalid_argument("grouping_loss: shape mismatch");
  GroupingLoss out;
  out.grad_a = Eigen::MatrixXd::Zero(n, n);
  if (terms.bce) {
    auto b = bce_matrix_loss(a_pred, a_gt);
    out.bce = b.loss;
    out.grad_a += b.grad;
  }
  if (terms.eig) {
    auto e = eig_loss(laplacian(a_pred), basis, cfg);
    out.eig = e.loss;
    out.grad_a += e.grad;
  }
  if (terms.mse) {
    auto m = cardinality_mse(pred_k, target);
    out.mse = m.loss;
    out.grad_k = m.grad;
  }
  out.total = out.bce + out.eig + out.mse;
  return out;
}

inline double total_loss(double l_g, double l_act) {
  if (!std::isfinite(l_g) || !std::isfinite(l_act))
    throw std::invalid_argument("total_loss: non-finite component");
  return l_g + l_act;
}

// ---------------------------------------------------------------------------
// Action partitions

/// A run of labels trained by one softmax (pose) or one sigmoid group
/// (interactions). When `has_other` is set, the last slot is the "Other"
/// class standing for every label in later partitions.
struct Partition {
  std::vector<LabelId> labels;
  bool has_other = false;

  Eigen::Index slots() const { return static_cast<Eigen::Index>(labels.size()) + (has_other ? 1 : 0); }
  Eigen::Index other_slot() const { return static_cast<Eigen::Index>(labels.size()); }
};

struct PartitionScheme {
  std::vector<Partition> pose;
  std::vector<Partition> interaction;
  /// Leading sigmoid deciding whether any interaction is present.
  bool presence_head = true;

  struct Slot {
    bool pose = true;
    std::size_t partition = 0;
    Eigen::Index index = 0;
  };

  std::optional<Slot> locate(LabelId label) const {
    auto scan = [&](const std::vector<Partition>& parts, bool is_pose) -> std::optional<Slot> {
      for (std::size_t p = 0; p < parts.size(); ++p)
        for (std::size_t k = 0; k < parts[p].labels.size(); ++k)
          if (parts[p].labels[k] == label) return Slot{is_pose, p, static_cast<Eigen::Index>(k)};
      return std::nullopt;
    };
    if (auto s = scan(pose, true)) return s;
    return scan(interaction, false);
  }
};

/// Splits one category's labels, taken in descending count order, into runs
/// where every count is at least a tenth of the run's largest count.
/// Zero-count labels have no samples and are left out.
inline std::vector<Partition> partition_by_frequency(const Vocabulary& vocab,
                                                     const std::vector<LabelId>& labels) {
  std::vector<LabelId> sorted;
  for (LabelId l : labels)
    if (vocab.frequency(l) > 0) sorted.push_back(l);
  if (sorted.empty()) throw ValidationError("build_partitions: category has no labels with samples");
  std::stable_sort(sorted.begin(), sorted.end(),
                   [&](LabelId a, LabelId b) { return vocab.frequency(a) > vocab.frequency(b); });
  std::vector<Partition> parts;
  std::int64_t head = 0;
  for (LabelId l : sorted) {
    const auto count = vocab.frequency(l);
    if (parts.empty() || 10 * count < head) {
      parts.push_back({});
      head = count;
    }
    parts.back().labels.push_back(l);
  }
  for (std::size_t p = 0; p + 1 < parts.size(); ++p) parts[p].has_other = true;
  return parts;
}

inline PartitionScheme build_partitions(const Vocabulary& vocab) {
  PartitionScheme s;
  s.pose = partition_by_frequency(vocab, vocab.labels_in(Category::Pose));
  s.interaction = partition_by_frequency(vocab, vocab.interaction_labels());
  s.presence_head = true;
  return s;
}

/// One softmax over every pose label and one sigmoid group over every
/// interaction label, the unpartitioned baseline.
inline PartitionScheme flat_scheme(const Vocabulary& vocab) {
  PartitionScheme s;
  auto keep = [&](std::vector<LabelId> ids) {
    std::erase_if(ids, [&](LabelId l) { return vocab.frequency(l) <= 0; });
    return ids;
  };
  s.pose = {Partition{keep(vocab.labels_in(Category::Pose)), false}};
  s.interaction = {Partition{keep(vocab.interaction_labels()), false}};
  s.presence_head = false;
  return s;
}

/// Normalized inverse-frequency class weights with mean 1 over labels that
/// have samples.
inline std::vector<double> inverse_frequency_weights(const Vocabulary& vocab) {
  std::vector<double> w(vocab.size(), 0.0);
  double sum = 0;
  int count = 0;
  for (const auto& l : vocab.labels())
    if (vocab.frequency(l.id) > 0) {
      w[static_cast<std::size_t>(l.id)] = 1.0 / static_cast<double>(vocab.frequency(l.id));
      sum += w[static_cast<std::size_t>(l.id)];
      ++count;
    }
  for (auto& x : w) x *= count / sum;
  return w;
}

/// Per-partition head values: logits, probabilities or gradients.
struct ActionHeads {
  std::vector<Eigen::VectorXd> pose;
  double presence = 0;
  std::vector<Eigen::VectorXd> interaction;

  static ActionHeads zeros(const PartitionScheme& s) {
    ActionHeads h;
    for (const auto& p : s.pose) h.pose.push_back(Eigen::VectorXd::Zero(p.slots()));
    for (const auto& p : s.interaction) h.interaction.push_back(Eigen::VectorXd::Zero(p.slots()));
    return h;
  }
};

struct LossWeights {
  std::vector<double> lambda_pose{1.0, 1.0, 1.0};
  std::vector<double> lambda_inter{1.0, 1.0, 1.0, 1.0};  ///< presence head first

  double pose(std::size_t p) const { return p < lambda_pose.size() ? lambda_pose[p] : 1.0; }
  double inter(std::size_t k) const { return k < lambda_inter.size() ? lambda_inter[k] : 1.0; }
};

/// Ground-truth action labels of one person.
struct ActionTargets {
  LabelId pose = 0;
  std::vector<LabelId> interactions;
};

struct ActionLoss {
  double loss = 0;
  ActionHeads grad;
  std::vector<bool> pose_active;
  bool presence_active = false;
  std::vector<bool> interaction_active;
};

namespace detail {

inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
inline double sigmoid(double z) { return z >= 0 ? 1 / (1 + std::exp(-z)) : std::exp(z) / (1 + std::exp(z)); }

inline Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

}  // namespace detail

/// Partitioned action loss for one person.
///
/// Pose: a cross entropy per partition on the path to the ground-truth label;
/// earlier partitions are trained towards "Other". Interactions: the presence
/// sigmoid, then a mean binary cross entropy on every partition up to the last
/// one holding a ground-truth label, with "Other" raised where later
/// partitions hold one. Partitions off the path contribute nothing and get a
/// zero gradient. Without a presence head the first interaction partition is
/// always trained. `class_weights`, when non-empty, scales each label's term.
inline ActionLoss action_loss(const ActionHeads& logits, const ActionTargets& gt,
                              const PartitionScheme& scheme, const LossWeights& w = {},
                              const std::vector<double>& class_weights = {}) {
  if (logits.pose.size() != scheme.pose.size() || logits.interaction.size() != scheme.interaction.size())
    throw std::invalid_argument("action_loss: logits do not match the partition scheme");
  for (std::size_t p = 0; p < scheme.pose.size(); ++p)
    if (logits.pose[p].size() != scheme.pose[p].slots())
      throw std::invalid_argument("action_loss: pose logit size mismatch");
  for (std::size_t p = 0; p < scheme.interaction.size(); ++p)
    if (logits.interaction[p].size() != scheme.interaction[p].slots())
      throw std::invalid_argument("action_loss: interaction logit size mismatch");

  auto weight_of = [&](const Partition& part, Eigen::Index slot) {
    if (class_weights.empty() || slot >= static_cast<Eigen::Index>(part.labels.size())) return 1.0;
    return class_weights.at(static_cast<std::size_t>(part.labels[static_cast<std::size_t>(slot)]));
  };

  ActionLoss out;
  out.grad = ActionHeads::zeros(scheme);
  out.pose_active.assign(scheme.pose.size(), false);
  out.interaction_active.assign(scheme.interaction.size(), false);

  auto pose_slot = scheme.locate(gt.pose);
  if (!pose_slot || !pose_slot->pose)
    throw ValidationError("action_loss: pose label " + std::to_string(gt.pose) + " is not in any pose partition");
  for (std::size_t p = 0; p <= pose_slot->partition; ++p) {
    const auto& part = scheme.pose[p];
    const Eigen::Index target = p == pose_slot->partition ? pose_slot->index : part.other_slot();
    const Eigen::VectorXd prob = detail::softmax(logits.pose[p]);
    const double cw = weight_of(part, target);
    const double lam = w.pose(p);
    out.loss += lam * cw * -std::log(std::max(prob[target], kProbEpsilon));
    Eigen::VectorXd g = prob;
    g[target] -= 1;
    out.grad.pose[p] = lam * cw * g;
    out.pose_active[p] = true;
  }

  // Interaction targets per partition.
  std::vector<std::vector<Eigen::Index>> present(scheme.interaction.size());
  long last = -1;
  for (LabelId l : gt.interactions) {
    auto s = scheme.locate(l);
    if (!s || s->pose)
      throw ValidationError("action_loss: interaction label " + std::to_string(l) + " is not in any interaction partition");
    present[s->partition].push_back(s->index);
    last = std::max(last, static_cast<long>(s->partition));
  }

  if (scheme.presence_head) {
    const double y = last >= 0 ? 1.0 : 0.0;
    const double z = logits.presence;
    out.loss += w.inter(0) * (detail::softplus(z) - y * z);
    out.grad.presence = w.inter(0) * (detail::sigmoid(z) - y);
    out.presence_active = true;
  }

  const std::size_t offset = scheme.presence_head ? 1 : 0;
  for (std::size_t p = 0; p < scheme.interaction.size(); ++p) {
    const bool active = static_cast<long>(p) <= last || (!scheme.presence_head && p == 0);
    if (!active) continue;
    const auto& part = scheme.interaction[p];
    Eigen::VectorXd y = Eigen::VectorXd::Zero(part.slots());
    for (Eigen::Index k : present[p]) y[k] = 1;
    if (part.has_other && static_cast<long>(p) < last) y[part.other_slot()] = 1;
    const double lam = w.inter(p + offset);
    const double slots = static_cast<double>(part.slots());
    for (Eigen::Index k = 0; k < part.slots(); ++k) {
      const double z = logits.interaction[p][k];
      const double cw = weight_of(part, k);
      out.loss += lam * cw * (detail::softplus(z) - y[k] * z) / slots;
      out.grad.interaction[p][k] = lam * cw * (detail::sigmoid(z) - y[k]) / slots;
    }
    out.interaction_active[p] = true;
  }
  return out;
}

}  // namespace groupact

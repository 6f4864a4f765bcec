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

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "groupact/activity.hpp"
#include "groupact/graph.hpp"
#include "groupact/losses.hpp"

namespace groupact {

struct ClusterAssignment {
  std::vector<int> labels;  ///< dense in [0, k)
  int k = 0;
};

struct KMeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centers;
  double inertia = std::numeric_limits<double>::infinity();
};

namespace detail {

// Rows of `x` clustered by Lloyd iterations from a k-means++ seeding.
inline KMeansResult kmeans_once(const Eigen::MatrixXd& x, int k, std::mt19937_64& rng,
                                int max_iter = 100) {
  const auto n = x.rows();
  KMeansResult r;
  r.centers.resize(k, x.cols());
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  auto first = static_cast<Eigen::Index>(unit(rng) * static_cast<double>(n));
  r.centers.row(0) = x.row(std::min(first, n - 1));
  for (int c = 1; c < k; ++c) {
    double total = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], (x.row(i) - r.centers.row(c - 1)).squaredNorm());
      total += d2[static_cast<std::size_t>(i)];
    }
    Eigen::Index pick = n - 1;
    if (total > 0) {
      double u = unit(rng) * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        u -= d2[static_cast<std::size_t>(i)];
        if (u < 0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(unit(rng) * static_cast<double>(n));
      pick = std::min(pick, n - 1);
    }
    r.centers.row(c) = x.row(pick);
  }

  r.labels.assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (x.row(i) - r.centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (r.labels[static_cast<std::size_t>(i)] != best) {
        r.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(r.labels[static_cast<std::size_t>(i)]) += x.row(i);
      ++counts[static_cast<std::size_t>(r.labels[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        r.centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
        continue;
      }
      // Empty cluster: move it onto the point farthest from its center.
      Eigen::Index far = 0;
      double far_d = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = (x.row(i) - r.centers.row(r.labels[static_cast<std::size_t>(i)])).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      r.centers.row(c) = x.row(far);
      r.labels[static_cast<std::size_t>(far)] = c;
      changed = true;
    }
    if (!changed) break;
  }
  r.inertia = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    r.inertia += (x.row(i) - r.centers.row(r.labels[static_cast<std::size_t>(i)])).squaredNorm();
  return r;
}

// Relabels to dense ids ordered by smallest member.
inline std::vector<int> canonical_labels(const std::vector<int>& labels, int* k) {
  std::map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) out.push_back(remap.emplace(l, static_cast<int>(remap.size())).first->second);
  *k = static_cast<int>(remap.size());
  return out;
}

// I - D^{-1/2} A D^{-1/2}, degrees including the unit self-affinity so an
// isolated person keeps a finite embedding.
inline Eigen::MatrixXd normalized_laplacian(const SimilarityMatrix& a) {
  const Eigen::VectorXd d = a.values().rowwise().sum().cwiseMax(1e-12);
  const Eigen::VectorXd inv = d.cwiseSqrt().cwiseInverse();
  const auto n = a.n();
  Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n, n) - inv.asDiagonal() * a.values() * inv.asDiagonal();
  return 0.5 * (l + l.transpose());
}

}  // namespace detail

/// Lowest-inertia k-means over `restarts` seeded k-means++ runs.
inline KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts = 10) {
  if (k < 1 || k > points.rows()) throw std::invalid_argument("kmeans: k out of range");
  KMeansResult best;
  std::seed_seq seq{seed, static_cast<std::uint64_t>(0x9e3779b97f4a7c15ULL)};
  std::mt19937_64 master(seq);
  for (int r = 0; r < restarts; ++r) {
    std::mt19937_64 rng(master());
    auto run = detail::kmeans_once(points, k, rng);
    if (run.inertia < best.inertia - 1e-12) best = std::move(run);
  }
  return best;
}

/// Normalized spectral clustering: the k eigenvectors of the symmetric
/// normalized Laplacian with smallest eigenvalues, rows scaled to unit
/// length, then restarted k-means. Deterministic for a given seed.
inline ClusterAssignment spectral_cluster(const SimilarityMatrix& a, int k, std::uint64_t seed) {
  if (k < 1 || k > a.n()) throw std::invalid_argument("spectral_cluster: k out of range");
  ClusterAssignment out;
  if (k == 1) {
    out.labels.assign(static_cast<std::size_t>(a.n()), 0);
    out.k = 1;
    return out;
  }
  const auto eig = symmetric_eigen(detail::normalized_laplacian(a));
  Eigen::MatrixXd emb = eig.vectors.leftCols(k);
  for (Eigen::Index i = 0; i < emb.rows(); ++i) {
    const double norm = emb.row(i).norm();
    if (norm > 1e-12) emb.row(i) /= norm;
  }
  auto km = kmeans(emb, k, seed);
  out.labels = detail::canonical_labels(km.labels, &out.k);
  return out;
}

/// Number of groups at the largest gap of the normalized Laplacian spectrum,
/// ties going to the smaller count.
inline int estimate_k_eigengap(const SimilarityMatrix& a) {
  const auto n = a.n();
  if (n <= 1) return 1;
  const auto eig = symmetric_eigen(detail::normalized_laplacian(a));
  int best = 1;
  double best_gap = -std::numeric_limits<double>::infinity();
  for (Eigen::Index g = 1; g < n; ++g) {
    const double gap = eig.values[g] - eig.values[g - 1];
    if (gap > best_gap + 1e-12) {
      best_gap = gap;
      best = static_cast<int>(g);
    }
  }
  return best;
}

/// Rounds the cardinality head output half-up and clamps it to [1, n].
inline int predict_k(double card_head_output, Eigen::Index n) {
  if (!std::isfinite(card_head_output)) throw std::invalid_argument("predict_k: non-finite input");
  const double r = std::floor(card_head_output + 0.5);
  return static_cast<int>(std::clamp(r, 1.0, static_cast<double>(std::max<Eigen::Index>(n, 1))));
}

/// Softmax over every pose partition and sigmoid over every interaction slot.
inline ActionHeads head_probabilities(const ActionHeads& logits) {
  ActionHeads p;
  for (const auto& z : logits.pose) p.pose.push_back(detail::softmax(z));
  p.presence = detail::sigmoid(logits.presence);
  for (const auto& z : logits.interaction) p.interaction.push_back(z.unaryExpr(&detail::sigmoid));
  return p;
}

namespace detail {

inline void check_shapes(const ActionHeads& probs, const PartitionScheme& scheme) {
  bool ok = probs.pose.size() == scheme.pose.size() && probs.interaction.size() == scheme.interaction.size();
  for (std::size_t p = 0; ok && p < scheme.pose.size(); ++p) ok = probs.pose[p].size() == scheme.pose[p].slots();
  for (std::size_t p = 0; ok && p < scheme.interaction.size(); ++p)
    ok = probs.interaction[p].size() == scheme.interaction[p].slots();
  if (!ok) throw std::invalid_argument("malformed head scores for the partition scheme");
}

}  // namespace detail

/// Hierarchical decoding: each cascade continues into the next partition only
/// while "Other" wins (pose) or reaches 0.5 (interactions).
inline LabelSet decode_actions_hierarchical(const ActionHeads& probs, const PartitionScheme& scheme,
                                            double threshold = 0.5) {
  detail::check_shapes(probs, scheme);
  LabelSet out;
  for (std::size_t p = 0; p < scheme.pose.size(); ++p) {
    const auto& part = scheme.pose[p];
    Eigen::Index best = 0;
    probs.pose[p].maxCoeff(&best);
    if (part.has_other && best == part.other_slot()) {
      if (p + 1 < scheme.pose.size()) continue;
      // A trailing Other has nowhere to go; take the best real label.
      probs.pose[p].head(part.other_slot()).maxCoeff(&best);
    }
    out.insert(part.labels[static_cast<std::size_t>(best)]);
    break;
  }
  if (scheme.presence_head && probs.presence < threshold) return out;
  for (std::size_t p = 0; p < scheme.interaction.size(); ++p) {
    const auto& part = scheme.interaction[p];
    for (std::size_t k = 0; k < part.labels.size(); ++k)
      if (probs.interaction[p][static_cast<Eigen::Index>(k)] >= threshold) out.insert(part.labels[k]);
    if (!part.has_other || probs.interaction[p][part.other_slot()] < threshold) break;
  }
  return out;
}

/// Per-label confidence for ranking: the label's probability times the
/// probabilities of reaching its partition through "Other" (and, for
/// interactions, through the presence head).
inline std::map<LabelId, double> hierarchical_label_scores(const ActionHeads& probs,
                                                           const PartitionScheme& scheme) {
  detail::check_shapes(probs, scheme);
  std::map<LabelId, double> out;
  double reach = 1.0;
  for (std::size_t p = 0; p < scheme.pose.size(); ++p) {
    const auto& part = scheme.pose[p];
    for (std::size_t k = 0; k < part.labels.size(); ++k)
      out[part.labels[k]] = reach * probs.pose[p][static_cast<Eigen::Index>(k)];
    if (part.has_other) reach *= probs.pose[p][part.other_slot()];
  }
  reach = scheme.presence_head ? probs.presence : 1.0;
  for (std::size_t p = 0; p < scheme.interaction.size(); ++p) {
    const auto& part = scheme.interaction[p];
    for (std::size_t k = 0; k < part.labels.size(); ++k)
      out[part.labels[k]] = reach * probs.interaction[p][static_cast<Eigen::Index>(k)];
    if (part.has_other) reach *= probs.interaction[p][part.other_slot()];
  }
  return out;
}

/// Activity of each predicted group from its members' predicted labels, with
/// the same shared-label and singleton rules as the ground-truth side.
inline std::map<int, LabelSet> infer_social_activity_pred(const ClusterAssignment& groups,
                                                          const std::vector<LabelSet>& actions) {
  if (groups.labels.size() != actions.size())
    throw std::invalid_argument("infer_social_activity_pred: person count mismatch");
  std::map<int, std::vector<LabelSet>> members;
  for (std::size_t i = 0; i < actions.size(); ++i) members[groups.labels[i]].push_back(actions[i]);
  std::map<int, LabelSet> out;
  for (const auto& [g, sets] : members) out.emplace(g, common_labels(sets));
  return out;
}

}  // namespace groupact

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

// Fixtures and naive reference routines shared by the unit and acceptance
// tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "groupact/eval.hpp"
#include "groupact/io.hpp"
#include "groupact/types.hpp"

namespace groupact::testing {

inline std::string data_path(const std::string& rel) { return std::string(GROUPACT_DATA_DIR) + "/" + rel; }

struct WorkedExample {
  Vocabulary vocab;
  std::vector<AnnotatedKeyFrame> gt;
  std::vector<PredictedKeyFrame> pred;

  LabelId id(const std::string& name) const { return *vocab.find(name); }
};

inline WorkedExample worked_example() {
  WorkedExample w;
  w.vocab = io::load_vocabulary(data_path("worked_example/vocab.json"));
  w.gt = io::load_ground_truth(data_path("worked_example/gt.jsonl"), w.vocab);
  w.pred = io::load_predictions(data_path("worked_example/pred.jsonl"), w.vocab);
  return w;
}

/// Random group ids for n people, with up to `max_groups` distinct values.
inline std::vector<GroupId> random_partition(int n, int max_groups, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, std::max(0, max_groups - 1));
  std::vector<GroupId> g(static_cast<std::size_t>(n));
  for (auto& x : g) x = 10 + 3 * pick(rng);
  return g;
}

inline int distinct(const std::vector<GroupId>& g) { return static_cast<int>(std::set<GroupId>(g.begin(), g.end()).size()); }

/// Two labelings describe the same partition.
template <class A, class B>
bool same_partition(const std::vector<A>& a, const std::vector<B>& b) {
  if (a.size() != b.size()) return false;
  std::map<A, B> fwd;
  std::map<B, A> back;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [f, fi] = fwd.emplace(a[i], b[i]);
    auto [r, ri] = back.emplace(b[i], a[i]);
    if (f->second != b[i] || r->second != a[i]) return false;
  }
  return true;
}

/// max |a - b| over max(|a|, |b|), floored so exact zeros compare cleanly.
inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), 1e-6});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

/// Average precision straight from a scored list: one operating point per
/// distinct score, precision interpolated as the best precision at any
/// operating point with at least that recall, summed over recall steps.
inline double naive_average_precision(const std::vector<ScoredOutcome>& dets, std::int64_t positives,
                                      bool eleven_point = false) {
  if (positives <= 0) return 0.0;
  std::set<double, std::greater<>> thresholds;
  for (const auto& d : dets) thresholds.insert(d.score);
  std::vector<std::pair<double, double>> ops;  // (recall, precision)
  for (double t : thresholds) {
    std::int64_t tp = 0, fp = 0;
    for (const auto& d : dets) {
      if (d.score < t) continue;
      if (d.outcome == Outcome::TruePositive) ++tp;
      if (d.outcome == Outcome::FalsePositive) ++fp;
    }
    if (tp + fp == 0) continue;
    ops.emplace_back(static_cast<double>(tp) / positives, static_cast<double>(tp) / (tp + fp));
  }
  auto interpolated = [&](double r) {
    double best = 0;
    for (auto [rr, pp] : ops)
      if (rr >= r - 1e-12) best = std::max(best, pp);
    return best;
  };
  if (eleven_point) {
    double s = 0;
    for (int k = 0; k <= 10; ++k) s += interpolated(k / 10.0);
    return s / 11;
  }
  std::set<double> recalls;
  for (auto [r, p] : ops) recalls.insert(r);
  double ap = 0, prev = 0;
  for (double r : recalls) {
    if (r <= prev) continue;
    ap += (r - prev) * interpolated(r);
    prev = r;
  }
  return ap;
}

/// Random ranked list with ties, ignored entries and missed positives.
inline std::pair<std::vector<ScoredOutcome>, std::int64_t> random_ranked_list(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(0, 40), levels(1, 12), kind(0, 9);
  const int n = len(rng);
  const int l = levels(rng);
  std::uniform_int_distribution<int> level(0, l);
  std::vector<ScoredOutcome> dets;
  std::int64_t tp = 0;
  for (int i = 0; i < n; ++i) {
    const int k = kind(rng);
    const Outcome o = k < 4 ? Outcome::TruePositive : (k < 9 ? Outcome::FalsePositive : Outcome::Ignored);
    tp += o == Outcome::TruePositive;
    dets.push_back({static_cast<double>(level(rng)) / l, o});
  }
  std::uniform_int_distribution<int> missed(0, 5);
  return {dets, tp + missed(rng)};
}

}  // namespace groupact::testing

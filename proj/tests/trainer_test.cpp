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

#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "groupact/oracle.hpp"
#include "groupact/trainer.hpp"
#include "support.hpp"

namespace groupact {
namespace {

const Vocabulary& vocab() {
  static const Vocabulary v = io::default_vocabulary();
  return v;
}

std::vector<Scene> small_set(std::uint64_t seed, int count, int people = 10) {
  SceneSpec spec;
  spec.seed = seed;
  spec.n_people = people;
  return generate_dataset(spec, vocab(), count);
}

TEST(DV, CosineRescaled) {
  Eigen::VectorXd a(2), b(2), c(2);
  a << 1, 0;
  b << 0, 1;
  c << -2, 0;
  EXPECT_DOUBLE_EQ(d_v(a, a), 1.0);
  EXPECT_DOUBLE_EQ(d_v(a, b), 0.5);
  EXPECT_DOUBLE_EQ(d_v(a, c), 0.0);
  EXPECT_THROW(d_v(a, Eigen::VectorXd::Zero(2)), std::invalid_argument);
  EXPECT_THROW(d_v(a, Eigen::VectorXd::Ones(3)), std::invalid_argument);
}

TEST(GroupPooledFeatures, MaxOverGroup) {
  Eigen::MatrixXd h(3, 2);
  h << 1, 5, 3, 2, 0, 0;
  const auto x = group_pooled_features(h, {0, 0, 1});
  Eigen::MatrixXd want(3, 4);
  want << 1, 5, 3, 5, 3, 2, 3, 5, 0, 0, 0, 0;
  EXPECT_EQ(x, want);
  EXPECT_THROW(group_pooled_features(h, {0}), std::invalid_argument);
}

TEST(AffinityMass, MeanOffDiagonalDegree) {
  Eigen::MatrixXd a(3, 3);
  a << 1, 0.5, 0, 0.5, 1, 0.25, 0, 0.25, 1;
  EXPECT_DOUBLE_EQ(affinity_mass(SimilarityMatrix(a)), 1.5 / 3);
}

TEST(Variants, Lists) {
  const auto g = grouping_ablation_variants();
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(g[0].name, "Baseline1");
  EXPECT_FALSE(g[0].geo);
  EXPECT_EQ(g[1].cardinality, CardinalityMode::Eigengap);
  EXPECT_EQ(g[2].grouping, GroupingObjective::Bce);
  EXPECT_EQ(g[3].name, "Ours");
  EXPECT_EQ(g[3].grouping, GroupingObjective::BceEigen);
  const auto a = action_ablation_variants();
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(find_variant("W-CE+W-BCE").action, ActionObjective::Weighted);
  EXPECT_THROW(find_variant("Baseline4"), ValidationError);
}

// [w_v, w_g, b, head weights..., head bias]
Eigen::VectorXd pack(const ToyModel& m) {
  Eigen::VectorXd x(3 + m.cardinality.weights.size() + 1);
  x << m.combiner.w_visual, m.combiner.w_geo, m.combiner.bias, m.cardinality.weights, m.cardinality.bias;
  return x;
}

void unpack(ToyModel& m, const Eigen::VectorXd& x) {
  m.combiner = {x[0], x[1], x[2]};
  const auto d = m.cardinality.weights.size();
  m.cardinality.weights = x.segment(3, d);
  m.cardinality.bias = x[3 + d];
}

TEST(GroupingStep, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n01(0, 0.3);
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto scenes = small_set(100 + seed, 1, 4 + static_cast<int>(seed));
    const auto v = grouping_ablation_variants()[seed % 2 ? 3 : 2];
    ToyModel m = initial_model(v, vocab(), scenes, 1);
    auto x = pack(m);
    for (auto& e : x) e += n01(rng);
    unpack(m, x);
    const auto p = detail::prepare_scene(scenes[0]);
    const TrainConfig cfg;
    const auto step = detail::grouping_step(m, p, cfg);
    Eigen::VectorXd analytic(x.size());
    analytic << step.grad_combiner, step.grad_head;
    const auto numeric = oracle::finite_difference_grad(
        [&](const Eigen::VectorXd& y) {
          ToyModel local = m;
          unpack(local, y);
          return detail::grouping_step(local, p, cfg).loss;
        },
        x, 1e-6);
    EXPECT_LT(testing::relative_error(analytic, numeric), 1e-5) << seed;
  }
}

TEST(GroupingStep, NoGeometryGradientWithoutGeometry) {
  const auto scenes = small_set(3, 1);
  const auto m = initial_model(grouping_ablation_variants()[0], vocab(), scenes, 1);
  EXPECT_EQ(m.combiner.w_geo, 0.0);
  EXPECT_EQ(detail::grouping_step(m, detail::prepare_scene(scenes[0]), TrainConfig{}).grad_combiner[1], 0.0);
}

TEST(InitialModel, StartsFromMeanGroupCount) {
  const auto scenes = small_set(8, 4);
  const auto m = initial_model(find_variant("Ours"), vocab(), scenes, 1);
  double mean = 0;
  for (const auto& s : scenes) mean += testing::distinct(group_ids(s.frame));
  EXPECT_DOUBLE_EQ(m.cardinality.bias, mean / 4);
  EXPECT_EQ(m.scheme.pose.size(), 3u);
  EXPECT_EQ(initial_model(find_variant("CE+BCE"), vocab(), scenes, 1).scheme.pose.size(), 1u);
  EXPECT_FALSE(initial_model(find_variant("W-CE+W-BCE"), vocab(), scenes, 1).class_weights.empty());
  EXPECT_THROW(initial_model(find_variant("Ours"), vocab(), {}, 1), std::invalid_argument);
}

TEST(Train, DeterministicAndDecreasing) {
  const auto scenes = small_set(5, 20);
  TrainConfig cfg;
  cfg.grouping_epochs = 6;
  cfg.total_epochs = 3;
  const auto a = train(scenes, vocab(), find_variant("Ours"), cfg);
  const auto b = train(scenes, vocab(), find_variant("Ours"), cfg);
  ASSERT_EQ(a.curve.size(), 9u);
  for (std::size_t i = 0; i < a.curve.size(); ++i) EXPECT_EQ(a.curve[i].loss, b.curve[i].loss);
  EXPECT_EQ(a.curve.front().stage, 1);
  EXPECT_EQ(a.curve.back().stage, 2);
  EXPECT_LT(a.curve[5].loss, a.curve[0].loss);
}

TEST(Train, ZeroEpochsKeepsInitialModel) {
  const auto scenes = small_set(6, 3);
  TrainConfig cfg;
  cfg.grouping_epochs = cfg.total_epochs = 0;
  const auto v = find_variant("Baseline3");
  const auto r = train(scenes, vocab(), v, cfg);
  const auto m = initial_model(v, vocab(), scenes, cfg.seed);
  EXPECT_TRUE(r.curve.empty());
  EXPECT_EQ(pack(r.model), pack(m));
}

TEST(Train, DivergenceReported) {
  // Finite rates recover through the plateau rule; an infinite one cannot.
  const auto scenes = small_set(7, 3);
  TrainConfig cfg;
  cfg.grouping_epochs = 1;
  cfg.total_epochs = 1;
  cfg.lr = std::numeric_limits<double>::infinity();
  try {
    train(scenes, vocab(), find_variant("Ours"), cfg);
    ADD_FAILURE() << "no DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.epoch(), 0);
  }
}

TEST(Predict, OneBoxPerPersonWithDenseGroups) {
  const auto scenes = small_set(9, 2);
  TrainConfig cfg;
  cfg.grouping_epochs = 2;
  cfg.total_epochs = 1;
  const auto r = train(scenes, vocab(), find_variant("Ours"), cfg);
  const auto p = predict(r.model, scenes[0]);
  ASSERT_EQ(p.persons.size(), scenes[0].frame.persons.size());
  EXPECT_EQ(p.frame_id, scenes[0].frame.frame_id);
  for (const auto& q : p.persons) {
    EXPECT_GE(q.group_id, 1);
    EXPECT_EQ(q.action_scores.size(), 24u);
  }
  EXPECT_NO_THROW(validate(p, vocab()));
}

TEST(Ablation, RequiresFiveSeeds) {
  AblationConfig cfg;
  cfg.seeds = {1, 2, 3};
  EXPECT_THROW(ablation_run(vocab(), cfg), std::invalid_argument);
}

TEST(Ablation, CsvShape) {
  AblationConfig cfg;
  cfg.variants = action_ablation_variants();
  cfg.metric = AblationMetric::ActionMAP;
  cfg.train_scenes = 4;
  cfg.test_scenes = 2;
  cfg.scene.n_people = 8;
  cfg.train.grouping_epochs = 1;
  cfg.train.total_epochs = 1;
  const auto r = ablation_run(vocab(), cfg);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.curves.size(), 15u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.per_seed.size(), 5u);
    EXPECT_EQ(row.per_seed, row.action_map);
  }
  std::ostringstream csv;
  write_ablation_csv(csv, r);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "variant,mean,stddev,mean_grouping_ap,mean_action_map,per_seed");
  int rows = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ';'), 4) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 3);
  std::ostringstream curves;
  write_loss_csv(curves, r, cfg);
  EXPECT_EQ(curves.str().rfind("variant,seed,epoch,stage,loss,lr\n", 0), 0u);
}

}  // namespace
}  // namespace groupact

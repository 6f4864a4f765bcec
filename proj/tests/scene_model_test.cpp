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

#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "groupact/activity.hpp"
#include "groupact/io.hpp"
#include "groupact/synth.hpp"
#include "support.hpp"

namespace groupact {
namespace {

using testing::worked_example;

std::vector<AnnotatedKeyFrame> parse_gt(const std::string& text, const Vocabulary& vocab) {
  std::istringstream in(text);
  return io::read_ground_truth(in, vocab, "test.jsonl");
}

std::vector<PredictedKeyFrame> parse_pred(const std::string& text, const Vocabulary& vocab) {
  std::istringstream in(text);
  return io::read_predictions(in, vocab, "test.jsonl");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

AnnotatedKeyFrame frame_with(std::vector<std::vector<std::pair<LabelId, Difficulty>>> people,
                             std::vector<GroupId> groups) {
  AnnotatedKeyFrame f;
  f.frame_id = "f";
  for (std::size_t i = 0; i < people.size(); ++i) {
    PersonGT p;
    p.track_id = static_cast<int>(i);
    p.box = {10.0 * static_cast<double>(i), 0, 5, 10};
    p.pose = {people[i][0].first, people[i][0].second};
    for (std::size_t k = 1; k < people[i].size(); ++k) p.interactions.push_back({people[i][k].first, people[i][k].second});
    p.group_id = groups[i];
    f.persons.push_back(p);
  }
  return f;
}

TEST(Vocabulary, DefaultHasCategoryCounts) {
  const auto v = io::default_vocabulary();
  EXPECT_EQ(v.size(), 26u);
  EXPECT_EQ(v.labels_in(Category::Pose).size(), 11u);
  EXPECT_EQ(v.labels_in(Category::HumanHuman).size(), 3u);
  EXPECT_EQ(v.labels_in(Category::HumanObject).size(), 12u);
}

TEST(Vocabulary, RejectsDuplicateNames) {
  std::vector<ActionLabel> labels{{0, "a", Category::Pose}, {1, "a", Category::Pose}};
  EXPECT_THROW(Vocabulary(labels, {}), ValidationError);
}

TEST(Vocabulary, FileRoundTrip) {
  const auto v = io::load_vocabulary(testing::data_path("vocab.json"));
  const auto d = io::default_vocabulary();
  ASSERT_EQ(v.size(), d.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto id = static_cast<LabelId>(i);
    EXPECT_EQ(v.name(id), d.name(id));
    EXPECT_EQ(v.category(id), d.category(id));
    EXPECT_EQ(v.frequency(id), d.frequency(id));
  }
}

TEST(Vocabulary, UnknownCategoryIsParseError) {
  EXPECT_THROW(io::parse_vocabulary(io::Json::parse(R"({"labels":[{"name":"x","category":"dance"}]})")),
               ParseError);
}

TEST(GroundTruth, MinimalFrame) {
  const auto v = io::default_vocabulary();
  const auto frames = parse_gt(
      R"({"frame_id":"f0","persons":[{"track_id":3,"box":[1,2,30,60],"pose":{"label":"standing","diff":"E"},"interactions":[],"group_id":0,"group_diff":"E"}]})",
      v);
  ASSERT_EQ(frames.size(), 1u);
  ASSERT_EQ(frames[0].persons.size(), 1u);
  EXPECT_EQ(frames[0].persons[0].pose.label, *v.find("standing"));
  EXPECT_EQ(frames[0].persons[0].group_id, 0);
  EXPECT_EQ(frames[0].persons[0].box, (BoundingBox{1, 2, 30, 60}));
}

TEST(GroundTruth, DuplicateInteractionRejected) {
  const auto v = io::default_vocabulary();
  EXPECT_THROW(parse_gt(R"({"frame_id":"f","persons":[{"track_id":1,"box":[0,0,5,5],"pose":{"label":"walking","diff":"E"},"interactions":[{"label":"holding sth","diff":"E"},{"label":"holding sth","diff":"M"}],"group_id":1,"group_diff":"E"}]})",
                        v),
               ValidationError);
}

TEST(GroundTruth, ImpossibleOnlyOnPose) {
  const auto v = io::default_vocabulary();
  EXPECT_NO_THROW(parse_gt(R"({"frame_id":"f","persons":[{"track_id":1,"box":[0,0,5,5],"pose":{"label":"walking","diff":"I"},"interactions":[],"group_id":1,"group_diff":"E"}]})",
                           v));
  EXPECT_THROW(parse_gt(R"({"frame_id":"f","persons":[{"track_id":1,"box":[0,0,5,5],"pose":{"label":"walking","diff":"E"},"interactions":[{"label":"reading","diff":"I"}],"group_id":1,"group_diff":"E"}]})",
                        v),
               ValidationError);
}

TEST(GroundTruth, ErrorsCarryLineAndField) {
  const auto v = io::default_vocabulary();
  const std::string good =
      R"({"frame_id":"a","persons":[]})"
      "\n";
  try {
    parse_gt(good + R"({"frame_id":"b","persons":[{"track_id":1,"box":[0,0,-5,5]}]})", v);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("test.jsonl:2"), std::string::npos) << what;
    EXPECT_NE(what.find("persons[0]"), std::string::npos) << what;
  }
  EXPECT_THROW(parse_gt("{not json", v), ParseError);
  EXPECT_THROW(parse_gt(R"({"frame_id":"a","persons":[{"track_id":1,"box":[0,0,5,5],"pose":{"label":"flying","diff":"E"},"interactions":[],"group_id":1,"group_diff":"E"}]})", v),
               ParseError);
}

TEST(GroundTruth, WorkedExampleFixture) {
  const auto w = worked_example();
  ASSERT_EQ(w.gt.size(), 1u);
  EXPECT_EQ(w.gt[0].persons.size(), 7u);
  EXPECT_EQ(testing::distinct(group_ids(w.gt[0])), 4);
  ASSERT_EQ(w.pred.size(), 1u);
  EXPECT_EQ(w.pred[0].persons.size(), 7u);
  EXPECT_EQ(testing::distinct(group_ids(w.pred[0])), 4);
}

TEST(Predictions, EmptyFrameIsValid) {
  const auto v = io::default_vocabulary();
  const auto p = parse_pred(R"({"frame_id":"f","persons":[]})", v);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_TRUE(p[0].persons.empty());
}

TEST(Predictions, ScoreRange) {
  const auto v = io::default_vocabulary();
  EXPECT_THROW(parse_pred(R"({"frame_id":"f","persons":[{"box":[0,0,5,5],"score":0.9,"action_scores":{"walking":1.3},"group_id":0}]})", v),
               ParseError);
  EXPECT_THROW(parse_pred(R"({"frame_id":"f","persons":[{"box":[0,0,5,5],"score":-0.1,"action_scores":{},"group_id":0}]})", v),
               ParseError);
}

TEST(RoundTrip, WorkedExampleFilesAreCanonical) {
  const auto w = worked_example();
  EXPECT_EQ(io::serialize(w.gt, w.vocab), slurp(testing::data_path("worked_example/gt.jsonl")));
  EXPECT_EQ(io::serialize(w.pred, w.vocab), slurp(testing::data_path("worked_example/pred.jsonl")));
}

TEST(RoundTrip, SyntheticFrames) {
  const auto v = io::default_vocabulary();
  SceneSpec spec;
  spec.seed = 11;
  std::vector<AnnotatedKeyFrame> gts;
  std::vector<PredictedKeyFrame> preds;
  for (const auto& s : generate_dataset(spec, v, 5)) {
    gts.push_back(s.frame);
    preds.push_back(perturb_predictions(s.frame, v, {0.1, 0.2, 0.2, 0.3, 4}));
  }
  const auto text = io::serialize(gts, v);
  const auto again = parse_gt(text, v);
  EXPECT_EQ(again, gts);
  EXPECT_EQ(io::serialize(again, v), text);
  const auto ptext = io::serialize(preds, v);
  EXPECT_EQ(io::serialize(parse_pred(ptext, v), v), ptext);
}

// ---------------------------------------------------------------------------

TEST(PseudoActivity, WorkedExampleGroups) {
  const auto w = worked_example();
  const auto act = infer_pseudo_group_activity(w.gt[0]);
  ASSERT_EQ(act.size(), 4u);
  EXPECT_EQ(act.at(1).labels, (LabelSet{w.id("A1"), w.id("A7")}));  // singleton keeps everything
  EXPECT_EQ(act.at(2).labels, (LabelSet{w.id("A3")}));
  EXPECT_EQ(act.at(3).labels, (LabelSet{w.id("A2")}));
  EXPECT_EQ(act.at(4).labels, (LabelSet{w.id("A6")}));
}

TEST(PseudoActivity, NoSharedLabelGivesEmptySet) {
  const auto d = Difficulty::Easy;
  const auto f = frame_with({{{0, d}, {13, d}}, {{1, d}, {14, d}}, {{2, d}}}, {5, 5, 5});
  EXPECT_TRUE(infer_pseudo_group_activity(f).at(5).labels.empty());
}

TEST(PseudoActivity, DifficultyIsRoundedMean) {
  EXPECT_EQ(average_difficulty({Difficulty::Easy, Difficulty::Moderate}), Difficulty::Moderate);  // 1.5 rounds up
  EXPECT_EQ(average_difficulty({Difficulty::Easy, Difficulty::Easy, Difficulty::Moderate}), Difficulty::Easy);
  EXPECT_EQ(average_difficulty({Difficulty::Moderate, Difficulty::Difficult}), Difficulty::Difficult);
  const auto f = frame_with({{{0, Difficulty::Easy}}, {{0, Difficulty::Moderate}}, {{1, Difficulty::Difficult}}}, {1, 1, 1});
  const auto a = infer_pseudo_group_activity(f).at(1);
  EXPECT_EQ(a.labels, LabelSet{0});
  EXPECT_EQ(a.difficulty, Difficulty::Moderate);
}

TEST(PseudoActivity, SubsetOfMemberLabelsProperty) {
  const auto v = io::default_vocabulary();
  SceneSpec spec;
  spec.seed = 21;
  for (const auto& s : generate_dataset(spec, v, 20)) {
    std::map<GroupId, std::map<LabelId, int>> counts;
    std::map<GroupId, int> sizes;
    for (const auto& p : s.frame.persons) {
      ++sizes[p.group_id];
      for (const auto& l : p.all_labels()) ++counts[p.group_id][l.label];
    }
    for (const auto& [g, act] : infer_pseudo_group_activity(s.frame))
      for (LabelId l : act.labels) {
        ASSERT_TRUE(counts[g].count(l));
        if (sizes[g] >= 2) {
          EXPECT_GE(counts[g][l], 2);
        }
      }
  }
}

TEST(DifficultyFilter, IgnoresOutsideTags) {
  const auto f = frame_with({{{0, Difficulty::Moderate}}, {{0, Difficulty::Impossible}}}, {1, 2});
  auto easy = filter_by_difficulty(f, {Difficulty::Easy});
  EXPECT_TRUE(easy.persons[0].pose.ignored);
  auto all = filter_by_difficulty(f, {Difficulty::Easy, Difficulty::Moderate, Difficulty::Difficult});
  EXPECT_FALSE(all.persons[0].pose.ignored);
  EXPECT_TRUE(all.persons[1].pose.ignored);
  EXPECT_THROW(filter_by_difficulty(f, {}), std::invalid_argument);
}

TEST(DifficultyFilter, IdempotentAndMonotone) {
  const auto v = io::default_vocabulary();
  SceneSpec spec;
  spec.seed = 5;
  const DifficultySet wide{Difficulty::Easy, Difficulty::Moderate, Difficulty::Difficult};
  const DifficultySet narrow{Difficulty::Easy};
  for (const auto& s : generate_dataset(spec, v, 10)) {
    const auto once = filter_by_difficulty(s.frame, wide);
    EXPECT_EQ(filter_by_difficulty(once, wide), once);
    const auto tighter = filter_by_difficulty(once, narrow);
    for (std::size_t i = 0; i < once.persons.size(); ++i) {
      const auto a = once.persons[i].all_labels(), b = tighter.persons[i].all_labels();
      for (std::size_t k = 0; k < a.size(); ++k) EXPECT_TRUE(!a[k].ignored || b[k].ignored);
      EXPECT_TRUE(!once.persons[i].group_ignored || tighter.persons[i].group_ignored);
    }
  }
}

TEST(DifficultyFilter, ParseSet) {
  EXPECT_EQ(parse_difficulty_set("E,M"), (DifficultySet{Difficulty::Easy, Difficulty::Moderate}));
  EXPECT_THROW(parse_difficulty_set("E,X"), std::invalid_argument);
  EXPECT_THROW(parse_difficulty_set("I"), std::invalid_argument);
}

}  // namespace
}  // namespace groupact

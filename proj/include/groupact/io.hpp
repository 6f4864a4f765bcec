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

// Line-delimited JSON ingestion and serialization for annotations,
// predictions and vocabularies.
//
//   GT line:   {"frame_id", "persons":[{"track_id", "box":[x,y,w,h],
//               "pose":{"label","diff"}, "interactions":[{"label","diff"}],
//               "group_id", "group_diff"}]}
//   Pred line: {"frame_id", "persons":[{"box", "score",
//               "action_scores":{label:score}, "group_id"}]}
//   Vocab:     {"labels":[{"name","category"}], "frequencies":{name:count}}

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "groupact/types.hpp"

namespace groupact::io {

using Json = nlohmann::ordered_json;

namespace detail {

class Cursor {
 public:
  Cursor(std::string source, std::size_t line) : source_(std::move(source)), line_(line) {}

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw ParseError(source_ + ":" + std::to_string(line_) + ": " + field + ": " + what);
  }

  const Json& member(const Json& obj, const std::string& path, const char* key) const {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing field");
    return *it;
  }

  double number(const Json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "expected a finite number");
    return d;
  }

  int integer(const Json& v, const std::string& path) const {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
  }

  const std::string& string(const Json& v, const std::string& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get_ref<const std::string&>();
  }

  const Json& array(const Json& v, const std::string& path) const {
    if (!v.is_array()) fail(path, "expected an array");
    return v;
  }

  BoundingBox box(const Json& v, const std::string& path) const {
    array(v, path);
    if (v.size() != 4) fail(path, "expected [x, y, w, h]");
    BoundingBox b{number(v[0], path + "[0]"), number(v[1], path + "[1]"),
                  number(v[2], path + "[2]"), number(v[3], path + "[3]")};
    if (b.w <= 0 || b.h <= 0) fail(path, "box width and height must be positive");
    return b;
  }

  Difficulty difficulty(const Json& v, const std::string& path) const {
    auto d = parse_difficulty(string(v, path));
    if (!d) fail(path, "unknown difficulty '" + v.get<std::string>() + "'");
    return *d;
  }

  LabelId label(const Json& v, const std::string& path, const Vocabulary& vocab) const {
    const auto& name = string(v, path);
    auto id = vocab.find(name);
    if (!id) fail(path, "label '" + name + "' is not in the vocabulary");
    return *id;
  }

  TaggedLabel tagged(const Json& v, const std::string& path, const Vocabulary& vocab) const {
    return {label(member(v, path, "label"), path + ".label", vocab),
            difficulty(member(v, path, "diff"), path + ".diff")};
  }

 private:
  std::string source_;
  std::size_t line_;
};

inline Json parse_line(const std::string& text, const std::string& source, std::size_t line) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(source + ":" + std::to_string(line) + ": " + e.what());
  }
}

// Integral values are written without a fractional part so hand-written
// files survive a load/serialize round trip unchanged.
inline Json number(double v) {
  if (std::nearbyint(v) == v && std::fabs(v) < 1e15) return Json(static_cast<std::int64_t>(v));
  return Json(v);
}

inline Json box(const BoundingBox& b) {
  return Json::array({number(b.x), number(b.y), number(b.w), number(b.h)});
}

template <class Fn>
void for_each_line(std::istream& in, const std::string& source, Fn&& fn) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    fn(parse_line(text, source, line), Cursor(source, line));
  }
}

inline std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  return in;
}

}  // namespace detail

inline AnnotatedKeyFrame parse_ground_truth_frame(const Json& j, const detail::Cursor& c,
                                                  const Vocabulary& vocab) {
  AnnotatedKeyFrame frame;
  frame.frame_id = c.string(c.member(j, "frame", "frame_id"), "frame_id");
  const auto& persons = c.array(c.member(j, "frame", "persons"), "persons");
  for (std::size_t i = 0; i < persons.size(); ++i) {
    const std::string path = "persons[" + std::to_string(i) + "]";
    const auto& pj = persons[i];
    PersonGT p;
    p.track_id = c.integer(c.member(pj, path, "track_id"), path + ".track_id");
    p.box = c.box(c.member(pj, path, "box"), path + ".box");
    p.pose = c.tagged(c.member(pj, path, "pose"), path + ".pose", vocab);
    const auto& inter = c.array(c.member(pj, path, "interactions"), path + ".interactions");
    for (std::size_t k = 0; k < inter.size(); ++k)
      p.interactions.push_back(
          c.tagged(inter[k], path + ".interactions[" + std::to_string(k) + "]", vocab));
    p.group_id = c.integer(c.member(pj, path, "group_id"), path + ".group_id");
    p.group_difficulty = c.difficulty(c.member(pj, path, "group_diff"), path + ".group_diff");
    frame.persons.push_back(std::move(p));
  }
  validate(frame, vocab);
  return frame;
}

inline PredictedKeyFrame parse_prediction_frame(const Json& j, const detail::Cursor& c,
                                                const Vocabulary& vocab) {
  PredictedKeyFrame frame;
  frame.frame_id = c.string(c.member(j, "frame", "frame_id"), "frame_id");
  const auto& persons = c.array(c.member(j, "frame", "persons"), "persons");
  for (std::size_t i = 0; i < persons.size(); ++i) {
    const std::string path = "persons[" + std::to_string(i) + "]";
    const auto& pj = persons[i];
    PersonPred p;
    p.box = c.box(c.member(pj, path, "box"), path + ".box");
    p.score = c.number(c.member(pj, path, "score"), path + ".score");
    if (p.score < 0 || p.score > 1) c.fail(path + ".score", "score outside [0,1]");
    const auto& scores = c.member(pj, path, "action_scores");
    if (!scores.is_object()) c.fail(path + ".action_scores", "expected an object");
    for (const auto& [name, value] : scores.items()) {
      const std::string field = path + ".action_scores." + name;
      auto id = vocab.find(name);
      if (!id) c.fail(field, "label '" + name + "' is not in the vocabulary");
      double s = c.number(value, field);
      if (s < 0 || s > 1) c.fail(field, "action score outside [0,1]");
      p.action_scores[*id] = s;
    }
    p.group_id = c.integer(c.member(pj, path, "group_id"), path + ".group_id");
    frame.persons.push_back(std::move(p));
  }
  validate(frame, vocab);
  return frame;
}

inline std::vector<AnnotatedKeyFrame> read_ground_truth(std::istream& in, const Vocabulary& vocab,
                                                        const std::string& source = "<stream>") {
  std::vector<AnnotatedKeyFrame> frames;
  detail::for_each_line(in, source, [&](const Json& j, const detail::Cursor& c) {
    frames.push_back(parse_ground_truth_frame(j, c, vocab));
  });
  return frames;
}

inline std::vector<PredictedKeyFrame> read_predictions(std::istream& in, const Vocabulary& vocab,
                                                       const std::string& source = "<stream>") {
  std::vector<PredictedKeyFrame> frames;
  detail::for_each_line(in, source, [&](const Json& j, const detail::Cursor& c) {
    frames.push_back(parse_prediction_frame(j, c, vocab));
  });
  return frames;
}

inline std::vector<AnnotatedKeyFrame> load_ground_truth(const std::string& path,
                                                        const Vocabulary& vocab) {
  auto in = detail::open(path);
  return read_ground_truth(in, vocab, path);
}

inline std::vector<PredictedKeyFrame> load_predictions(const std::string& path,
                                                       const Vocabulary& vocab) {
  auto in = detail::open(path);
  return read_predictions(in, vocab, path);
}

inline Json to_json(const AnnotatedKeyFrame& frame, const Vocabulary& vocab) {
  auto tagged = [&](const TaggedLabel& l) {
    Json t;
    t["label"] = vocab.name(l.label);
    t["diff"] = std::string(to_string(l.difficulty));
    return t;
  };
  Json persons = Json::array();
  for (const auto& p : frame.persons) {
    Json pj;
    pj["track_id"] = p.track_id;
    pj["box"] = detail::box(p.box);
    pj["pose"] = tagged(p.pose);
    Json inter = Json::array();
    for (const auto& l : p.interactions) inter.push_back(tagged(l));
    pj["interactions"] = std::move(inter);
    pj["group_id"] = p.group_id;
    pj["group_diff"] = std::string(to_string(p.group_difficulty));
    persons.push_back(std::move(pj));
  }
  Json j;
  j["frame_id"] = frame.frame_id;
  j["persons"] = std::move(persons);
  return j;
}

inline Json to_json(const PredictedKeyFrame& frame, const Vocabulary& vocab) {
  Json persons = Json::array();
  for (const auto& p : frame.persons) {
    Json pj;
    pj["box"] = detail::box(p.box);
    pj["score"] = detail::number(p.score);
    Json scores = Json::object();
    for (const auto& [label, s] : p.action_scores) scores[vocab.name(label)] = detail::number(s);
    pj["action_scores"] = std::move(scores);
    pj["group_id"] = p.group_id;
    persons.push_back(std::move(pj));
  }
  Json j;
  j["frame_id"] = frame.frame_id;
  j["persons"] = std::move(persons);
  return j;
}

template <class Frame>
void write_frames(std::ostream& out, const std::vector<Frame>& frames, const Vocabulary& vocab) {
  for (const auto& f : frames) out << to_json(f, vocab).dump() << '\n';
}

template <class Frame>
std::string serialize(const std::vector<Frame>& frames, const Vocabulary& vocab) {
  std::ostringstream out;
  write_frames(out, frames, vocab);
  return out.str();
}

inline Vocabulary parse_vocabulary(const Json& j, const std::string& source = "<vocab>") {
  detail::Cursor c(source, 1);
  const auto& labels = c.array(c.member(j, "vocab", "labels"), "labels");
  std::vector<ActionLabel> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string path = "labels[" + std::to_string(i) + "]";
    ActionLabel l;
    l.id = static_cast<LabelId>(i);
    l.name = c.string(c.member(labels[i], path, "name"), path + ".name");
    const auto& cat = c.string(c.member(labels[i], path, "category"), path + ".category");
    auto parsed = parse_category(cat);
    if (!parsed) c.fail(path + ".category", "unknown category '" + cat + "'");
    l.category = *parsed;
    out.push_back(std::move(l));
  }
  std::vector<std::int64_t> freq(out.size(), 0);
  if (auto it = j.find("frequencies"); it != j.end()) {
    if (!it->is_object()) c.fail("frequencies", "expected an object");
    for (const auto& [name, count] : it->items()) {
      auto pos = std::find_if(out.begin(), out.end(), [&](const auto& l) { return l.name == name; });
      if (pos == out.end()) c.fail("frequencies." + name, "unknown label");
      if (!count.is_number_integer() || count.get<std::int64_t>() < 0)
        c.fail("frequencies." + name, "expected a nonnegative integer");
      freq[static_cast<std::size_t>(pos - out.begin())] = count.get<std::int64_t>();
    }
  }
  try {
    return Vocabulary(std::move(out), std::move(freq));
  } catch (const ValidationError& e) {
    throw ParseError(source + ": " + e.what());
  }
}

inline Vocabulary load_vocabulary(const std::string& path) {
  auto in = detail::open(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_vocabulary(detail::parse_line(buffer.str(), path, 1), path);
}

inline Json to_json(const Vocabulary& vocab) {
  Json labels = Json::array();
  Json freq = Json::object();
  for (const auto& l : vocab.labels()) {
    Json lj;
    lj["name"] = l.name;
    lj["category"] = std::string(to_string(l.category));
    labels.push_back(std::move(lj));
    freq[l.name] = vocab.frequency(l.id);
  }
  Json j;
  j["labels"] = std::move(labels);
  j["frequencies"] = std::move(freq);
  return j;
}

/// Default action vocabulary: 11 pose, 3 human-human and 12 human-object
/// labels. Two classes without a transcribed name are placeholders with zero
/// count. Counts are long-tailed and place the labels into the standard
/// frequency partitions.
inline Vocabulary default_vocabulary() {
  struct Entry {
    const char* name;
    Category category;
    std::int64_t count;
  };
  static const Entry entries[] = {
      {"walking", Category::Pose, 800000},
      {"standing", Category::Pose, 700000},
      {"sitting", Category::Pose, 300000},
      {"cycling", Category::Pose, 25000},
      {"going upstairs", Category::Pose, 10000},
      {"bending", Category::Pose, 5000},
      {"going downstairs", Category::Pose, 2000},
      {"skating", Category::Pose, 1200},
      {"scootering", Category::Pose, 800},
      {"running", Category::Pose, 400},
      {"pose placeholder", Category::Pose, 0},
      {"holding sth", Category::HumanObject, 300000},
      {"listening to someone", Category::HumanHuman, 150000},
      {"talking to someone", Category::HumanHuman, 100000},
      {"looking at robot", Category::HumanObject, 25000},
      {"looking into sth", Category::HumanObject, 20000},
      {"looking at sth", Category::HumanObject, 15000},
      {"typing", Category::HumanObject, 8000},
      {"interaction with door", Category::HumanObject, 5000},
      {"eating sth", Category::HumanObject, 3000},
      {"talking on the phone", Category::HumanObject, 2000},
      {"reading", Category::HumanObject, 1000},
      {"pointing at sth", Category::HumanObject, 600},
      {"pushing", Category::HumanObject, 400},
      {"greeting gestures", Category::HumanHuman, 250},
      {"human-object placeholder", Category::HumanObject, 0},
  };
  std::vector<ActionLabel> labels;
  std::vector<std::int64_t> freq;
  for (const auto& e : entries) {
    labels.push_back({0, e.name, e.category});
    freq.push_back(e.count);
  }
  return Vocabulary(std::move(labels), std::move(freq));
}

}  // namespace groupact::io

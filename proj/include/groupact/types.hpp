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
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace groupact {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. The message carries "<source>:<line>: <field>: ...".
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that breaks a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

using LabelId = int;
using GroupId = int;

enum class Category { Pose, HumanHuman, HumanObject };

enum class Difficulty { Easy = 1, Moderate = 2, Difficult = 3, Impossible = 4 };

inline std::string_view to_string(Category c) {
  switch (c) {
    case Category::Pose: return "pose";
    case Category::HumanHuman: return "human-human";
    case Category::HumanObject: return "human-object";
  }
  return "?";
}

inline std::optional<Category> parse_category(std::string_view s) {
  if (s == "pose") return Category::Pose;
  if (s == "human-human") return Category::HumanHuman;
  if (s == "human-object") return Category::HumanObject;
  return std::nullopt;
}

inline std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "easy";
    case Difficulty::Moderate: return "moderate";
    case Difficulty::Difficult: return "difficult";
    case Difficulty::Impossible: return "impossible";
  }
  return "?";
}

inline std::optional<Difficulty> parse_difficulty(std::string_view s) {
  if (s == "easy" || s == "E") return Difficulty::Easy;
  if (s == "moderate" || s == "M") return Difficulty::Moderate;
  if (s == "difficult" || s == "D") return Difficulty::Difficult;
  if (s == "impossible" || s == "I") return Difficulty::Impossible;
  return std::nullopt;
}

inline bool is_interaction(Category c) { return c != Category::Pose; }

struct ActionLabel {
  LabelId id = 0;
  std::string name;
  Category category = Category::Pose;
};

/// Ordered action vocabulary with per-label occurrence counts.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Throws ValidationError on duplicate names or negative counts.
  Vocabulary(std::vector<ActionLabel> labels, std::vector<std::int64_t> frequencies)
      : labels_(std::move(labels)), frequencies_(std::move(frequencies)) {
    if (frequencies_.empty()) frequencies_.assign(labels_.size(), 0);
    if (frequencies_.size() != labels_.size())
      throw ValidationError("vocabulary: frequency count does not match label count");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      labels_[i].id = static_cast<LabelId>(i);
      if (!by_name_.emplace(labels_[i].name, labels_[i].id).second)
        throw ValidationError("vocabulary: duplicate label '" + labels_[i].name + "'");
      if (frequencies_[i] < 0)
        throw ValidationError("vocabulary: negative count for '" + labels_[i].name + "'");
    }
  }

  std::size_t size() const { return labels_.size(); }
  const std::vector<ActionLabel>& labels() const { return labels_; }
  const ActionLabel& label(LabelId id) const { return labels_.at(static_cast<std::size_t>(id)); }
  const std::string& name(LabelId id) const { return label(id).name; }
  Category category(LabelId id) const { return label(id).category; }
  std::int64_t frequency(LabelId id) const { return frequencies_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::int64_t>& frequencies() const { return frequencies_; }

  std::optional<LabelId> find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<LabelId> labels_in(Category c) const {
    std::vector<LabelId> out;
    for (const auto& l : labels_)
      if (l.category == c) out.push_back(l.id);
    return out;
  }

  std::vector<LabelId> interaction_labels() const {
    std::vector<LabelId> out;
    for (const auto& l : labels_)
      if (is_interaction(l.category)) out.push_back(l.id);
    return out;
  }

 private:
  std::vector<ActionLabel> labels_;
  std::vector<std::int64_t> frequencies_;
  std::unordered_map<std::string, LabelId> by_name_;
};

/// Axis-aligned pixel box, (x, y) is the top-left corner.
struct BoundingBox {
  double x = 0, y = 0, w = 0, h = 0;

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  bool valid() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) && w > 0 &&
           h > 0;
  }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// A ground-truth label with its annotator confidence. `ignored` is set by
/// difficulty filtering; ignored labels are neither TP, FP nor FN.
struct TaggedLabel {
  LabelId label = 0;
  Difficulty difficulty = Difficulty::Easy;
  bool ignored = false;
  friend bool operator==(const TaggedLabel&, const TaggedLabel&) = default;
};

struct PersonGT {
  int track_id = 0;
  BoundingBox box;
  TaggedLabel pose;
  std::vector<TaggedLabel> interactions;
  GroupId group_id = 0;
  Difficulty group_difficulty = Difficulty::Easy;
  bool group_ignored = false;

  /// Pose label followed by the interactions.
  std::vector<TaggedLabel> all_labels() const {
    std::vector<TaggedLabel> out;
    out.reserve(interactions.size() + 1);
    out.push_back(pose);
    out.insert(out.end(), interactions.begin(), interactions.end());
    return out;
  }
  friend bool operator==(const PersonGT&, const PersonGT&) = default;
};

struct PersonPred {
  BoundingBox box;
  double score = 1.0;
  std::map<LabelId, double> action_scores;
  GroupId group_id = 0;
  friend bool operator==(const PersonPred&, const PersonPred&) = default;
};

struct AnnotatedKeyFrame {
  std::string frame_id;
  std::vector<PersonGT> persons;
  friend bool operator==(const AnnotatedKeyFrame&, const AnnotatedKeyFrame&) = default;
};

struct PredictedKeyFrame {
  std::string frame_id;
  std::vector<PersonPred> persons;
  friend bool operator==(const PredictedKeyFrame&, const PredictedKeyFrame&) = default;
};

/// Group ids of a frame, in person order.
template <class Frame>
std::vector<GroupId> group_ids(const Frame& frame) {
  std::vector<GroupId> out;
  out.reserve(frame.persons.size());
  for (const auto& p : frame.persons) out.push_back(p.group_id);
  return out;
}

/// Maps arbitrary group ids to dense ids ordered by first appearance.
inline std::vector<int> dense_group_index(const std::vector<GroupId>& ids, int* count = nullptr) {
  std::map<GroupId, int> seen;
  std::vector<int> out;
  out.reserve(ids.size());
  for (GroupId g : ids) {
    auto [it, inserted] = seen.emplace(g, static_cast<int>(seen.size()));
    out.push_back(it->second);
  }
  if (count) *count = static_cast<int>(seen.size());
  return out;
}

/// Member counts per group id.
inline std::map<GroupId, int> group_sizes(const std::vector<GroupId>& ids) {
  std::map<GroupId, int> sizes;
  for (GroupId g : ids) ++sizes[g];
  return sizes;
}

/// Throws ValidationError naming the frame and person on the first broken invariant.
inline void validate(const AnnotatedKeyFrame& frame, const Vocabulary& vocab) {
  auto fail = [&](std::size_t i, const std::string& what) {
    throw ValidationError("frame '" + frame.frame_id + "' person " + std::to_string(i) + ": " +
                          what);
  };
  auto check_label = [&](std::size_t i, const TaggedLabel& l) {
    if (l.label < 0 || static_cast<std::size_t>(l.label) >= vocab.size())
      fail(i, "label id out of vocabulary");
  };
  for (std::size_t i = 0; i < frame.persons.size(); ++i) {
    const auto& p = frame.persons[i];
    if (!p.box.valid()) fail(i, "box must be finite with w > 0 and h > 0");
    check_label(i, p.pose);
    if (vocab.category(p.pose.label) != Category::Pose)
      fail(i, "pose label '" + vocab.name(p.pose.label) + "' is not pose-based");
    std::set<LabelId> seen;
    for (const auto& l : p.interactions) {
      check_label(i, l);
      if (!is_interaction(vocab.category(l.label)))
        fail(i, "interaction label '" + vocab.name(l.label) + "' is pose-based");
      if (l.difficulty == Difficulty::Impossible)
        fail(i, "impossible difficulty is only legal on pose labels");
      if (!seen.insert(l.label).second)
        fail(i, "duplicate interaction label '" + vocab.name(l.label) + "'");
    }
    if (p.group_difficulty == Difficulty::Impossible)
      fail(i, "impossible difficulty is only legal on pose labels");
  }
}

inline void validate(const PredictedKeyFrame& frame, const Vocabulary& vocab) {
  auto fail = [&](std::size_t i, const std::string& what) {
    throw ValidationError("frame '" + frame.frame_id + "' prediction " + std::to_string(i) +
                          ": " + what);
  };
  for (std::size_t i = 0; i < frame.persons.size(); ++i) {
    const auto& p = frame.persons[i];
    if (!p.box.valid()) fail(i, "box must be finite with w > 0 and h > 0");
    if (!std::isfinite(p.score) || p.score < 0 || p.score > 1) fail(i, "score outside [0,1]");
    for (const auto& [label, s] : p.action_scores) {
      if (label < 0 || static_cast<std::size_t>(label) >= vocab.size())
        fail(i, "action label id out of vocabulary");
      if (!std::isfinite(s) || s < 0 || s > 1)
        fail(i, "action score for '" + vocab.name(label) + "' outside [0,1]");
    }
  }
}

}  // namespace groupact

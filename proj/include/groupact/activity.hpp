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

#include <map>
#include <set>
#include <vector>

#include "groupact/types.hpp"

namespace groupact {

using LabelSet = std::set<LabelId>;
using DifficultySet = std::set<Difficulty>;

/// Social activity of one group: the labels shared by at least two members,
/// or the member's own labels for a singleton.
struct GroupActivity {
  LabelSet labels;
  Difficulty difficulty = Difficulty::Easy;
  friend bool operator==(const GroupActivity&, const GroupActivity&) = default;
};

/// Labels carried by >= 2 of the given members; a single member keeps all of
/// its labels.
inline LabelSet common_labels(const std::vector<LabelSet>& members) {
  if (members.size() == 1) return members.front();
  std::map<LabelId, int> count;
  for (const auto& m : members)
    for (LabelId l : m) ++count[l];
  LabelSet out;
  for (const auto& [l, c] : count)
    if (c >= 2) out.insert(l);
  return out;
}

/// Mean of Easy=1, Moderate=2, Difficult=3, rounded half-up.
inline Difficulty average_difficulty(const std::vector<Difficulty>& tags) {
  if (tags.empty()) return Difficulty::Easy;
  int sum = 0;
  for (Difficulty d : tags) sum += static_cast<int>(d);
  const int n = static_cast<int>(tags.size());
  // round(sum / n) with halves going up, in integers.
  int level = (2 * sum + n) / (2 * n);
  if (level < 1) level = 1;
  if (level > 3) level = 3;
  return static_cast<Difficulty>(level);
}

/// Pseudo ground-truth activity per group id. Impossible-tagged labels carry
/// no action and do not contribute.
inline std::map<GroupId, GroupActivity> infer_pseudo_group_activity(const AnnotatedKeyFrame& frame) {
  std::map<GroupId, std::vector<const PersonGT*>> members;
  for (const auto& p : frame.persons) members[p.group_id].push_back(&p);

  std::map<GroupId, GroupActivity> out;
  for (const auto& [gid, persons] : members) {
    std::vector<LabelSet> sets;
    sets.reserve(persons.size());
    for (const PersonGT* p : persons) {
      LabelSet s;
      for (const auto& l : p->all_labels())
        if (l.difficulty != Difficulty::Impossible) s.insert(l.label);
      sets.push_back(std::move(s));
    }
    GroupActivity act;
    act.labels = common_labels(sets);
    std::vector<Difficulty> contributing;
    for (const PersonGT* p : persons)
      for (const auto& l : p->all_labels())
        if (l.difficulty != Difficulty::Impossible && act.labels.count(l.label))
          contributing.push_back(l.difficulty);
    act.difficulty = average_difficulty(contributing);
    out.emplace(gid, std::move(act));
  }
  return out;
}

/// True when a tag survives the filter. Impossible never does.
inline bool allowed_difficulty(Difficulty d, const DifficultySet& allowed) {
  return d != Difficulty::Impossible && allowed.count(d) > 0;
}

/// Marks labels and group memberships whose tag is outside `allowed` as
/// ignored. Existing ignore marks are kept, so the filter is idempotent and
/// shrinking `allowed` never un-ignores anything.
inline AnnotatedKeyFrame filter_by_difficulty(AnnotatedKeyFrame frame, const DifficultySet& allowed) {
  if (allowed.empty()) throw std::invalid_argument("filter_by_difficulty: empty allowed set");
  auto apply = [&](TaggedLabel& l) { l.ignored = l.ignored || !allowed_difficulty(l.difficulty, allowed); };
  for (auto& p : frame.persons) {
    apply(p.pose);
    for (auto& l : p.interactions) apply(l);
    p.group_ignored = p.group_ignored || !allowed_difficulty(p.group_difficulty, allowed);
  }
  return frame;
}

/// Parses "E", "E,M", "E,M,D" (or full tag names) into a difficulty set.
inline DifficultySet parse_difficulty_set(std::string_view text) {
  DifficultySet out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    auto token = text.substr(start, end - start);
    auto d = parse_difficulty(token);
    if (!d || *d == Difficulty::Impossible)
      throw std::invalid_argument("unknown difficulty tag '" + std::string(token) + "'");
    out.insert(*d);
    start = end + 1;
  }
  return out;
}

}  // namespace groupact

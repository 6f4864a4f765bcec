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

// Key-frame evaluation of the three tasks: individual action detection,
// social group detection (AP per group-size bucket) and social activity
// detection (G-Act mAP1 / mAP2).
//
// Boxes are matched once per frame, greedily by descending score at an IoU
// threshold. Grouping true positives additionally need the predicted group to
// map onto the partner's ground-truth group under a maximum-weight group-id
// assignment, which is recomputed at every confidence threshold.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "groupact/activity.hpp"
#include "groupact/assignment.hpp"
#include "groupact/geometry.hpp"
#include "groupact/types.hpp"

namespace groupact {

// ---------------------------------------------------------------------------
// Matching

struct MatchResult {
  std::vector<std::pair<int, int>> pairs;  ///< (pred, gt) in matching order
  std::vector<int> unmatched_preds;
  std::vector<int> unmatched_gts;
  std::vector<int> gt_of_pred;  ///< -1 when unmatched
  std::vector<int> order;       ///< predictions by descending score
};

/// Prediction order used by every sweep: score descending, then box
/// coordinates, so results do not depend on file order.
inline std::vector<int> prediction_order(const PredictedKeyFrame& preds) {
  std::vector<int> order(preds.persons.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& pa = preds.persons[static_cast<std::size_t>(a)];
    const auto& pb = preds.persons[static_cast<std::size_t>(b)];
    return std::tie(pb.score, pa.box.x, pa.box.y, pa.box.w, pa.box.h) <
           std::tie(pa.score, pb.box.x, pb.box.y, pb.box.w, pb.box.h);
  });
  return order;
}

/// Greedy one-to-one matching: each prediction, by descending score, takes
/// the unmatched ground truth of highest IoU at or above `iou_thresh`.
inline MatchResult match_detections(const PredictedKeyFrame& preds, const AnnotatedKeyFrame& gts,
                                    double iou_thresh = 0.5) {
  if (!(iou_thresh > 0 && iou_thresh <= 1))
    throw std::invalid_argument("match_detections: IoU threshold must be in (0,1]");
  MatchResult m;
  m.order = prediction_order(preds);
  m.gt_of_pred.assign(preds.persons.size(), -1);
  std::vector<char> taken(gts.persons.size(), 0);
  for (int p : m.order) {
    int best = -1;
    double best_iou = iou_thresh;
    for (std::size_t g = 0; g < gts.persons.size(); ++g) {
      if (taken[g]) continue;
      const double v = iou(preds.persons[static_cast<std::size_t>(p)].box, gts.persons[g].box);
      if (v >= best_iou && (best < 0 || v > best_iou)) {
        best = static_cast<int>(g);
        best_iou = v;
      }
    }
    if (best >= 0) {
      taken[static_cast<std::size_t>(best)] = 1;
      m.gt_of_pred[static_cast<std::size_t>(p)] = best;
      m.pairs.emplace_back(p, best);
    } else {
      m.unmatched_preds.push_back(p);
    }
  }
  for (std::size_t g = 0; g < gts.persons.size(); ++g)
    if (!taken[g]) m.unmatched_gts.push_back(static_cast<int>(g));
  return m;
}

// ---------------------------------------------------------------------------
// Group-id assignment

struct GroupIdAssignment {
  std::map<GroupId, GroupId> mapping;  ///< predicted group -> ground-truth group
  std::int64_t value = 0;              ///< matched boxes landing in a mapped pair
};

/// Maximum-weight one-to-one map between predicted and ground-truth group
/// ids. weight(p, g) counts matched boxes of predicted group p whose partner
/// lies in ground-truth group g. Only pairs in `counted` (all when empty)
/// contribute; prediction indices outside `kept` (all when empty) are absent.
inline GroupIdAssignment assign_group_ids(const MatchResult& match, const std::vector<GroupId>& pred_groups,
                                          const std::vector<GroupId>& gt_groups,
                                          const std::vector<char>& counted = {},
                                          const std::vector<char>& kept = {}) {
  std::vector<GroupId> prow, gcol;
  std::map<GroupId, int> prow_of, gcol_of;
  auto index = [](std::map<GroupId, int>& of, std::vector<GroupId>& ids, GroupId g) {
    auto [it, inserted] = of.emplace(g, static_cast<int>(ids.size()));
    if (inserted) ids.push_back(g);
    return it->second;
  };
  // Sorted ids so lexicographic tie-breaking follows group id order.
  std::set<GroupId> ps, gs;
  for (auto [p, g] : match.pairs) {
    if (!kept.empty() && !kept[static_cast<std::size_t>(p)]) continue;
    if (!counted.empty() && !counted[static_cast<std::size_t>(p)]) continue;
    ps.insert(pred_groups[static_cast<std::size_t>(p)]);
    gs.insert(gt_groups[static_cast<std::size_t>(g)]);
  }
  for (GroupId g : ps) index(prow_of, prow, g);
  for (GroupId g : gs) index(gcol_of, gcol, g);
  WeightMatrix w(prow.size(), std::vector<std::int64_t>(gcol.size(), 0));
  for (auto [p, g] : match.pairs) {
    if (!kept.empty() && !kept[static_cast<std::size_t>(p)]) continue;
    if (!counted.empty() && !counted[static_cast<std::size_t>(p)]) continue;
    ++w[static_cast<std::size_t>(prow_of[pred_groups[static_cast<std::size_t>(p)]])]
       [static_cast<std::size_t>(gcol_of[gt_groups[static_cast<std::size_t>(g)]])];
  }
  const auto a = max_weight_assignment(w);
  GroupIdAssignment out;
  out.value = a.value;
  for (std::size_t r = 0; r < prow.size(); ++r)
    if (a.row_to_col[r] >= 0) out.mapping[prow[r]] = gcol[static_cast<std::size_t>(a.row_to_col[r])];
  return out;
}

// ---------------------------------------------------------------------------
// Average precision

enum class ApStyle { AllPoints, ElevenPoint };

inline ApStyle parse_ap_style(std::string_view s) {
  if (s == "all-points") return ApStyle::AllPoints;
  if (s == "11-point") return ApStyle::ElevenPoint;
  throw std::invalid_argument("unknown AP style '" + std::string(s) + "'");
}

struct PRCurve {
  std::vector<std::pair<double, double>> points;  ///< (recall, precision) along the sweep
};

/// Area under the precision envelope. All-points: sum over recall steps of
/// the highest precision at that recall or beyond. 11-point: mean of that
/// envelope at recall 0, 0.1, ..., 1.
inline double ap_from_pr(const PRCurve& curve, ApStyle style = ApStyle::AllPoints) {
  if (curve.points.empty()) return 0.0;
  auto pts = curve.points;
  std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  // envelope[i] = max precision over points with recall >= pts[i].recall
  std::vector<double> env(pts.size());
  double running = 0;
  for (std::size_t i = pts.size(); i-- > 0;) {
    running = std::max(running, pts[i].second);
    env[i] = running;
  }
  if (style == ApStyle::ElevenPoint) {
    double sum = 0;
    for (int t = 0; t <= 10; ++t) {
      const double r = t / 10.0;
      auto it = std::lower_bound(pts.begin(), pts.end(), r - 1e-12,
                                 [](const auto& p, double v) { return p.first < v; });
      if (it != pts.end()) sum += env[static_cast<std::size_t>(it - pts.begin())];
    }
    return sum / 11.0;
  }
  double ap = 0, prev = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].first > prev) {
      ap += (pts[i].first - prev) * env[i];
      prev = pts[i].first;
    }
  }
  return ap;
}

enum class Outcome : std::uint8_t { TruePositive, FalsePositive, Ignored };

struct ScoredOutcome {
  double score = 0;
  Outcome outcome = Outcome::FalsePositive;
};

/// PR points at every distinct score of a detection list; ignored
/// detections only move the threshold.
inline PRCurve pr_curve(std::vector<ScoredOutcome> dets, std::int64_t positives) {
  PRCurve c;
  if (positives <= 0) return c;
  std::stable_sort(dets.begin(), dets.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  std::int64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < dets.size();) {
    const double s = dets[i].score;
    for (; i < dets.size() && dets[i].score == s; ++i) {
      if (dets[i].outcome == Outcome::TruePositive) ++tp;
      else if (dets[i].outcome == Outcome::FalsePositive) ++fp;
    }
    if (tp + fp > 0)
      c.points.emplace_back(static_cast<double>(tp) / static_cast<double>(positives),
                            static_cast<double>(tp) / static_cast<double>(tp + fp));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Report types

inline constexpr int kBuckets = 5;

/// 0 for singletons up to 4 for groups of five or more members.
inline int size_bucket(int group_size) { return std::clamp(group_size, 1, kBuckets) - 1; }

inline const char* bucket_name(int b) {
  static const char* names[kBuckets] = {"G1", "G2", "G3", "G4", "G5+"};
  return names[b];
}

struct GroupingAP {
  std::array<double, kBuckets> bucket{};
  std::array<bool, kBuckets> nonempty{};
  double overall = 0;
};

struct Counts {
  std::int64_t tp = 0, fp = 0, fn = 0;
  double precision() const { return tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0; }
  double recall() const { return tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0; }
};

struct EvalOptions {
  double iou = 0.5;
  DifficultySet allowed{Difficulty::Easy, Difficulty::Moderate};
  ApStyle ap_style = ApStyle::AllPoints;
  /// Score at which predicted labels count as present when inferring
  /// predicted group activities, and at which TP/FP/FN counts are reported.
  double label_threshold = 0.5;
  unsigned jobs = 1;
};

struct EvalReport {
  GroupingAP grouping;
  double action_map = 0;
  double gact_map1 = 0;
  double gact_map2 = 0;
  DifficultySet difficulty_filter;
  Counts action_counts, grouping_counts, gact1_counts, gact2_counts;
};

// ---------------------------------------------------------------------------
// Per-frame state

/// Per-box outcome lists at one operating point, referenced by prediction
/// and ground-truth indices within the frame.
struct FrameOutcomes {
  std::vector<int> tp_boxes, fp_boxes, fn_boxes;                       // grouping
  std::vector<std::pair<int, LabelId>> action_tp, action_fp, action_fn;  // (pred|gt, label)
  std::vector<std::pair<int, LabelId>> gact1_tp, gact1_fp, gact1_fn;
  std::vector<std::pair<int, LabelId>> gact2_tp, gact2_fp, gact2_fn;
};

namespace detail {

struct Detection {
  int pred = 0;
  LabelId label = 0;
  double score = 0;
};

struct FrameState {
  const AnnotatedKeyFrame* gt = nullptr;  // filtered
  const PredictedKeyFrame* pred = nullptr;
  MatchResult match;
  std::vector<GroupId> pred_groups, gt_groups;
  std::map<GroupId, int> pred_group_size, gt_group_size;
  std::vector<char> counted;        // pred matched to a non-ignored group membership
  std::vector<char> group_correct;  // under the assignment over all predictions
  // Grouping bucket counts after the first m predictions (index m).
  std::vector<std::array<std::int64_t, kBuckets>> prefix_tp, prefix_fp;
  std::array<std::int64_t, kBuckets> positives{};
  // Activity sets per box.
  std::vector<std::map<LabelId, bool>> gt_activity;  // label -> ignored
  std::vector<std::map<LabelId, double>> pred_activity;
};

inline int gt_bucket(const FrameState& s, int g) {
  return size_bucket(s.gt_group_size.at(s.gt_groups[static_cast<std::size_t>(g)]));
}

inline int pred_bucket(const FrameState& s, int p) {
  const int g = s.match.gt_of_pred[static_cast<std::size_t>(p)];
  if (g >= 0) return gt_bucket(s, g);
  return size_bucket(s.pred_group_size.at(s.pred_groups[static_cast<std::size_t>(p)]));
}

// Grouping status of every kept prediction under the assignment over kept ones.
// 0 = TP, 1 = FP, 2 = ignored, -1 = not kept.
inline std::vector<int> grouping_status(const FrameState& s, const std::vector<char>& kept) {
  const auto a = assign_group_ids(s.match, s.pred_groups, s.gt_groups, s.counted, kept);
  std::vector<int> status(s.pred->persons.size(), -1);
  for (std::size_t p = 0; p < status.size(); ++p) {
    if (!kept[p]) continue;
    const int g = s.match.gt_of_pred[p];
    if (g < 0) {
      status[p] = 1;
    } else if (s.gt->persons[static_cast<std::size_t>(g)].group_ignored) {
      status[p] = 2;
    } else {
      auto it = a.mapping.find(s.pred_groups[p]);
      status[p] = (it != a.mapping.end() && it->second == s.gt_groups[static_cast<std::size_t>(g)]) ? 0 : 1;
    }
  }
  return status;
}

inline FrameState prepare_frame(const AnnotatedKeyFrame& gt, const PredictedKeyFrame& pred,
                                const EvalOptions& opt) {
  FrameState s;
  s.gt = &gt;
  s.pred = &pred;
  s.match = match_detections(pred, gt, opt.iou);
  s.pred_groups = group_ids(pred);
  s.gt_groups = group_ids(gt);
  s.pred_group_size = group_sizes(s.pred_groups);
  s.gt_group_size = group_sizes(s.gt_groups);
  const std::size_t np = pred.persons.size();

  s.counted.assign(np, 0);
  for (auto [p, g] : s.match.pairs)
    s.counted[static_cast<std::size_t>(p)] = !gt.persons[static_cast<std::size_t>(g)].group_ignored;

  for (std::size_t g = 0; g < gt.persons.size(); ++g)
    if (!gt.persons[g].group_ignored) ++s.positives[static_cast<std::size_t>(gt_bucket(s, static_cast<int>(g)))];

  s.prefix_tp.assign(np + 1, {});
  s.prefix_fp.assign(np + 1, {});
  std::vector<char> kept(np, 0);
  for (std::size_t m = 1; m <= np; ++m) {
    kept[static_cast<std::size_t>(s.match.order[m - 1])] = 1;
    const auto status = grouping_status(s, kept);
    for (std::size_t p = 0; p < np; ++p) {
      if (status[p] == 0) ++s.prefix_tp[m][static_cast<std::size_t>(pred_bucket(s, static_cast<int>(p)))];
      if (status[p] == 1) ++s.prefix_fp[m][static_cast<std::size_t>(pred_bucket(s, static_cast<int>(p)))];
    }
  }
  const auto full = grouping_status(s, std::vector<char>(np, 1));
  s.group_correct.assign(np, 0);
  for (std::size_t p = 0; p < np; ++p) s.group_correct[p] = full[p] == 0;

  // Ground-truth activity per box.
  const auto activity = infer_pseudo_group_activity(gt);
  s.gt_activity.resize(gt.persons.size());
  for (std::size_t g = 0; g < gt.persons.size(); ++g) {
    const auto& act = activity.at(gt.persons[g].group_id);
    const bool ignored = !allowed_difficulty(act.difficulty, opt.allowed);
    for (LabelId l : act.labels) s.gt_activity[g][l] = ignored;
  }

  // Predicted activity per box from predicted groups and thresholded labels.
  std::map<GroupId, std::vector<std::size_t>> members;
  for (std::size_t p = 0; p < np; ++p) members[s.pred_groups[p]].push_back(p);
  s.pred_activity.resize(np);
  for (const auto& [gid, idx] : members) {
    std::vector<LabelSet> sets;
    for (std::size_t p : idx) {
      LabelSet ls;
      for (const auto& [l, sc] : pred.persons[p].action_scores)
        if (sc >= opt.label_threshold) ls.insert(l);
      sets.push_back(std::move(ls));
    }
    const LabelSet common = common_labels(sets);
    for (LabelId l : common) {
      double sum = 0;
      int count = 0;
      for (std::size_t k = 0; k < idx.size(); ++k)
        if (sets[k].count(l)) {
          sum += pred.persons[idx[k]].action_scores.at(l);
          ++count;
        }
      for (std::size_t p : idx) s.pred_activity[p][l] = sum / count;
    }
  }
  return s;
}

inline std::vector<FrameState> prepare_frames(const std::vector<AnnotatedKeyFrame>& gts,
                                              const std::vector<PredictedKeyFrame>& preds,
                                              const EvalOptions& opt) {
  std::vector<FrameState> states(gts.size());
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t f = begin; f < gts.size(); f += step) states[f] = prepare_frame(gts[f], preds[f], opt);
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(gts.size())));
  if (jobs <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(work, t, jobs);
    for (auto& th : pool) th.join();
  }
  return states;
}

// Outcome of a (pred box, label) detection against the matched box's labels.
inline Outcome label_outcome(const FrameState& s, int p, LabelId l,
                             const std::vector<std::map<LabelId, bool>>& gt_labels, bool need_group) {
  const int g = s.match.gt_of_pred[static_cast<std::size_t>(p)];
  if (g < 0) return Outcome::FalsePositive;
  const auto& labels = gt_labels[static_cast<std::size_t>(g)];
  auto it = labels.find(l);
  if (it == labels.end()) return Outcome::FalsePositive;
  if (it->second) return Outcome::Ignored;
  if (need_group && !s.group_correct[static_cast<std::size_t>(p)]) return Outcome::FalsePositive;
  return Outcome::TruePositive;
}

inline std::vector<std::map<LabelId, bool>> gt_action_labels(const AnnotatedKeyFrame& gt) {
  std::vector<std::map<LabelId, bool>> out(gt.persons.size());
  for (std::size_t g = 0; g < gt.persons.size(); ++g)
    for (const auto& l : gt.persons[g].all_labels()) out[g][l.label] = l.ignored;
  return out;
}

// Mean AP over labels with at least one non-ignored ground-truth instance.
// `gt_labels(f)` gives per-gt-box label->ignored maps; `pred_labels(f)` gives
// per-prediction label->score maps.
template <class GtFn, class PredFn>
double label_map(const std::vector<FrameState>& states, GtFn&& gt_labels, PredFn&& pred_labels,
                 bool need_group, ApStyle style) {
  std::map<LabelId, std::int64_t> positives;
  std::map<LabelId, std::vector<ScoredOutcome>> dets;
  for (const auto& s : states) {
    const auto& gl = gt_labels(s);
    for (const auto& box : gl)
      for (const auto& [l, ignored] : box)
        if (!ignored) ++positives[l];
    const auto& pl = pred_labels(s);
    for (std::size_t p = 0; p < pl.size(); ++p)
      for (const auto& [l, score] : pl[p])
        dets[l].push_back({score, label_outcome(s, static_cast<int>(p), l, gl, need_group)});
  }
  double sum = 0;
  int count = 0;
  for (const auto& [l, npos] : positives) {
    if (npos <= 0) continue;
    sum += ap_from_pr(pr_curve(dets[l], npos), style);
    ++count;
  }
  return count ? sum / count : 0.0;
}

template <class GtFn, class PredFn>
void label_outcomes_at(const FrameState& s, double threshold, GtFn&& gt_labels, PredFn&& pred_labels,
                       bool need_group, std::vector<std::pair<int, LabelId>>& tp,
                       std::vector<std::pair<int, LabelId>>& fp, std::vector<std::pair<int, LabelId>>& fn) {
  const auto& gl = gt_labels(s);
  const auto& pl = pred_labels(s);
  std::set<std::pair<int, LabelId>> hit;
  for (std::size_t p = 0; p < pl.size(); ++p) {
    for (const auto& [l, score] : pl[p]) {
      if (score < threshold) continue;
      const auto o = label_outcome(s, static_cast<int>(p), l, gl, need_group);
      // A matched box that carries the label claims it even when its group is
      // wrong, so the miss shows up once, as a false positive.
      if (const int g = s.match.gt_of_pred[p]; g >= 0 && gl[static_cast<std::size_t>(g)].count(l)) hit.emplace(g, l);
      if (o == Outcome::TruePositive) {
        tp.emplace_back(static_cast<int>(p), l);
      } else if (o == Outcome::FalsePositive) {
        fp.emplace_back(static_cast<int>(p), l);
      }
    }
  }
  for (std::size_t g = 0; g < gl.size(); ++g)
    for (const auto& [l, ignored] : gl[g])
      if (!ignored && !hit.count({static_cast<int>(g), l})) fn.emplace_back(static_cast<int>(g), l);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public evaluation API

/// Pairs prediction frames with ground-truth frames by frame id. Ground-truth
/// frames without predictions get an empty prediction list. Throws
/// ValidationError for predictions of unknown frames.
inline std::vector<PredictedKeyFrame> align_predictions(const std::vector<AnnotatedKeyFrame>& gts,
                                                        const std::vector<PredictedKeyFrame>& preds) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < gts.size(); ++i) index.emplace(gts[i].frame_id, i);
  std::vector<PredictedKeyFrame> out(gts.size());
  for (std::size_t i = 0; i < gts.size(); ++i) out[i].frame_id = gts[i].frame_id;
  for (const auto& p : preds) {
    auto it = index.find(p.frame_id);
    if (it == index.end()) throw ValidationError("prediction for unknown frame '" + p.frame_id + "'");
    auto& dst = out[it->second].persons;
    dst.insert(dst.end(), p.persons.begin(), p.persons.end());
  }
  return out;
}

inline std::vector<AnnotatedKeyFrame> filter_frames(const std::vector<AnnotatedKeyFrame>& gts,
                                                    const DifficultySet& allowed) {
  std::vector<AnnotatedKeyFrame> out;
  out.reserve(gts.size());
  for (const auto& f : gts) out.push_back(filter_by_difficulty(f, allowed));
  return out;
}

namespace detail {

inline GroupingAP grouping_ap_from_states(const std::vector<FrameState>& states, ApStyle style) {
  std::array<std::int64_t, kBuckets> positives{};
  for (const auto& s : states)
    for (int b = 0; b < kBuckets; ++b) positives[static_cast<std::size_t>(b)] += s.positives[static_cast<std::size_t>(b)];

  struct Event {
    double score;
    std::size_t frame;
  };
  std::vector<Event> events;
  for (std::size_t f = 0; f < states.size(); ++f)
    for (int p : states[f].match.order) events.push_back({states[f].pred->persons[static_cast<std::size_t>(p)].score, f});
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.score > b.score; });

  std::vector<std::size_t> prefix(states.size(), 0);
  std::array<std::int64_t, kBuckets> tp{}, fp{};
  std::array<PRCurve, kBuckets> curves;
  for (std::size_t i = 0; i < events.size();) {
    const double score = events[i].score;
    for (; i < events.size() && events[i].score == score; ++i) {
      const auto f = events[i].frame;
      const auto& s = states[f];
      const auto m = prefix[f];
      for (int b = 0; b < kBuckets; ++b) {
        tp[static_cast<std::size_t>(b)] += s.prefix_tp[m + 1][static_cast<std::size_t>(b)] - s.prefix_tp[m][static_cast<std::size_t>(b)];
        fp[static_cast<std::size_t>(b)] += s.prefix_fp[m + 1][static_cast<std::size_t>(b)] - s.prefix_fp[m][static_cast<std::size_t>(b)];
      }
      prefix[f] = m + 1;
    }
    for (int b = 0; b < kBuckets; ++b) {
      const auto bi = static_cast<std::size_t>(b);
      if (positives[bi] == 0 || tp[bi] + fp[bi] == 0) continue;
      curves[bi].points.emplace_back(static_cast<double>(tp[bi]) / static_cast<double>(positives[bi]),
                                     static_cast<double>(tp[bi]) / static_cast<double>(tp[bi] + fp[bi]));
    }
  }
  GroupingAP out;
  double sum = 0;
  int nonempty = 0;
  for (int b = 0; b < kBuckets; ++b) {
    const auto bi = static_cast<std::size_t>(b);
    out.nonempty[bi] = positives[bi] > 0;
    out.bucket[bi] = out.nonempty[bi] ? ap_from_pr(curves[bi], style) : 0.0;
    if (out.nonempty[bi]) {
      sum += out.bucket[bi];
      ++nonempty;
    }
  }
  out.overall = nonempty ? sum / nonempty : 0.0;
  return out;
}

inline auto action_gt_fn() {
  return [cache = std::unordered_map<const FrameState*, std::vector<std::map<LabelId, bool>>>()](
             const FrameState& s) mutable -> const std::vector<std::map<LabelId, bool>>& {
    auto it = cache.find(&s);
    if (it == cache.end()) it = cache.emplace(&s, gt_action_labels(*s.gt)).first;
    return it->second;
  };
}

inline auto action_pred_fn() {
  return [cache = std::unordered_map<const FrameState*, std::vector<std::map<LabelId, double>>>()](
             const FrameState& s) mutable -> const std::vector<std::map<LabelId, double>>& {
    auto it = cache.find(&s);
    if (it == cache.end()) {
      std::vector<std::map<LabelId, double>> v;
      for (const auto& p : s.pred->persons) v.push_back(p.action_scores);
      it = cache.emplace(&s, std::move(v)).first;
    }
    return it->second;
  };
}

inline auto activity_gt_fn() {
  return [](const FrameState& s) -> const std::vector<std::map<LabelId, bool>>& { return s.gt_activity; };
}
inline auto activity_pred_fn() {
  return [](const FrameState& s) -> const std::vector<std::map<LabelId, double>>& { return s.pred_activity; };
}

}  // namespace detail

/// Grouping AP per group-size bucket and their mean over nonempty buckets.
/// `gts` must already be difficulty-filtered.
inline GroupingAP grouping_ap(const std::vector<AnnotatedKeyFrame>& gts, const std::vector<PredictedKeyFrame>& preds,
                              const EvalOptions& opt = {}) {
  return detail::grouping_ap_from_states(detail::prepare_frames(gts, preds, opt), opt.ap_style);
}

/// Action mAP; a (box, label) detection is a TP when its matched box carries
/// the label. `gts` must already be difficulty-filtered.
inline double action_map(const std::vector<AnnotatedKeyFrame>& gts, const std::vector<PredictedKeyFrame>& preds,
                         const EvalOptions& opt = {}) {
  const auto states = detail::prepare_frames(gts, preds, opt);
  return detail::label_map(states, detail::action_gt_fn(), detail::action_pred_fn(), false, opt.ap_style);
}

/// Social activity mAP. Mode 1 ignores predicted groups; mode 2 also needs
/// the box's predicted group to map onto its ground-truth group.
inline double gact_map(const std::vector<AnnotatedKeyFrame>& gts, const std::vector<PredictedKeyFrame>& preds,
                       int mode, const EvalOptions& opt = {}) {
  if (mode != 1 && mode != 2) throw std::invalid_argument("gact_map: mode must be 1 or 2");
  const auto states = detail::prepare_frames(gts, preds, opt);
  return detail::label_map(states, detail::activity_gt_fn(), detail::activity_pred_fn(), mode == 2, opt.ap_style);
}

/// Outcome lists of one frame with predictions scoring at least `threshold`
/// (box score for grouping, label score for the label tasks). A ground-truth
/// item is a false negative only when no kept prediction reaches it; a
/// matched box with the wrong group counts once, as a false positive.
inline FrameOutcomes frame_outcomes(const AnnotatedKeyFrame& filtered_gt, const PredictedKeyFrame& pred,
                                    const EvalOptions& opt = {}, double threshold = 0.5) {
  const auto s = detail::prepare_frame(filtered_gt, pred, opt);
  FrameOutcomes o;
  std::vector<char> kept(pred.persons.size(), 0);
  for (std::size_t p = 0; p < kept.size(); ++p) kept[p] = pred.persons[p].score >= threshold;
  const auto status = detail::grouping_status(s, kept);
  std::vector<char> covered(filtered_gt.persons.size(), 0);
  for (std::size_t p = 0; p < status.size(); ++p) {
    if (status[p] < 0) continue;
    if (const int g = s.match.gt_of_pred[p]; g >= 0) covered[static_cast<std::size_t>(g)] = 1;
    if (status[p] == 0) o.tp_boxes.push_back(static_cast<int>(p));
    if (status[p] == 1) o.fp_boxes.push_back(static_cast<int>(p));
  }
  for (std::size_t g = 0; g < covered.size(); ++g)
    if (!covered[g] && !filtered_gt.persons[g].group_ignored) o.fn_boxes.push_back(static_cast<int>(g));

  auto agt = detail::action_gt_fn();
  auto apred = detail::action_pred_fn();
  detail::label_outcomes_at(s, threshold, agt, apred, false, o.action_tp, o.action_fp, o.action_fn);
  detail::label_outcomes_at(s, threshold, detail::activity_gt_fn(), detail::activity_pred_fn(), false, o.gact1_tp,
                            o.gact1_fp, o.gact1_fn);
  detail::label_outcomes_at(s, threshold, detail::activity_gt_fn(), detail::activity_pred_fn(), true, o.gact2_tp,
                            o.gact2_fp, o.gact2_fn);
  return o;
}

/// Full evaluation: difficulty filtering, all three tasks and the TP/FP/FN
/// counts at `opt.label_threshold`.
inline EvalReport evaluate(const std::vector<AnnotatedKeyFrame>& gts, const std::vector<PredictedKeyFrame>& preds,
                           const EvalOptions& opt = {}) {
  const auto filtered = filter_frames(gts, opt.allowed);
  const auto aligned = align_predictions(gts, preds);
  const auto states = detail::prepare_frames(filtered, aligned, opt);
  EvalReport r;
  r.difficulty_filter = opt.allowed;
  r.grouping = detail::grouping_ap_from_states(states, opt.ap_style);
  r.action_map = detail::label_map(states, detail::action_gt_fn(), detail::action_pred_fn(), false, opt.ap_style);
  r.gact_map1 = detail::label_map(states, detail::activity_gt_fn(), detail::activity_pred_fn(), false, opt.ap_style);
  r.gact_map2 = detail::label_map(states, detail::activity_gt_fn(), detail::activity_pred_fn(), true, opt.ap_style);
  for (std::size_t f = 0; f < filtered.size(); ++f) {
    const auto o = frame_outcomes(filtered[f], aligned[f], opt, opt.label_threshold);
    auto add = [](Counts& c, std::size_t tp, std::size_t fp, std::size_t fn) {
      c.tp += static_cast<std::int64_t>(tp);
      c.fp += static_cast<std::int64_t>(fp);
      c.fn += static_cast<std::int64_t>(fn);
    };
    add(r.grouping_counts, o.tp_boxes.size(), o.fp_boxes.size(), o.fn_boxes.size());
    add(r.action_counts, o.action_tp.size(), o.action_fp.size(), o.action_fn.size());
    add(r.gact1_counts, o.gact1_tp.size(), o.gact1_fp.size(), o.gact1_fn.size());
    add(r.gact2_counts, o.gact2_tp.size(), o.gact2_fp.size(), o.gact2_fn.size());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Report output

inline std::string format4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

inline std::string difficulty_label(const DifficultySet& s) {
  std::string out;
  for (Difficulty d : s) {
    if (!out.empty()) out += ',';
    out += d == Difficulty::Easy ? "E" : d == Difficulty::Moderate ? "M" : d == Difficulty::Difficult ? "D" : "I";
  }
  return out;
}

/// key=value lines, one metric per line.
inline void write_key_values(std::ostream& out, const EvalReport& r) {
  out << "difficulty=" << difficulty_label(r.difficulty_filter) << '\n';
  for (int b = 0; b < kBuckets; ++b)
    out << "grouping_ap." << bucket_name(b) << '=' << (r.grouping.nonempty[static_cast<std::size_t>(b)] ? format4(r.grouping.bucket[static_cast<std::size_t>(b)]) : "nan") << '\n';
  out << "grouping_ap.overall=" << format4(r.grouping.overall) << '\n';
  out << "action_map=" << format4(r.action_map) << '\n';
  out << "gact_map1=" << format4(r.gact_map1) << '\n';
  out << "gact_map2=" << format4(r.gact_map2) << '\n';
  auto counts = [&](const char* name, const Counts& c) {
    out << name << ".tp=" << c.tp << '\n' << name << ".fp=" << c.fp << '\n' << name << ".fn=" << c.fn << '\n';
  };
  counts("action", r.action_counts);
  counts("grouping", r.grouping_counts);
  counts("gact1", r.gact1_counts);
  counts("gact2", r.gact2_counts);
}

/// Aligned text table: G1..G5+, overall, Action mAP, G-Act mAP1, G-Act mAP2.
inline void write_table(std::ostream& out, const EvalReport& r) {
  const char* heads[] = {"G1", "G2", "G3", "G4", "G5+", "overall", "Action mAP", "G-Act mAP1", "G-Act mAP2"};
  std::vector<std::string> cells;
  for (int b = 0; b < kBuckets; ++b)
    cells.push_back(r.grouping.nonempty[static_cast<std::size_t>(b)] ? format4(r.grouping.bucket[static_cast<std::size_t>(b)]) : "-");
  cells.push_back(format4(r.grouping.overall));
  cells.push_back(format4(r.action_map));
  cells.push_back(format4(r.gact_map1));
  cells.push_back(format4(r.gact_map2));
  std::ostringstream h, v;
  h << "| [" << difficulty_label(r.difficulty_filter) << "] ";
  v << "| " << std::string(difficulty_label(r.difficulty_filter).size() + 2, ' ') << ' ';
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::size_t w = std::max(std::string(heads[i]).size(), cells[i].size());
    char hb[64], vb[64];
    std::snprintf(hb, sizeof hb, "| %*s ", static_cast<int>(w), heads[i]);
    std::snprintf(vb, sizeof vb, "| %*s ", static_cast<int>(w), cells[i].c_str());
    h << hb;
    v << vb;
  }
  out << h.str() << "|\n" << v.str() << "|\n";
  auto line = [&](const char* task, const Counts& c) {
    out << task << ": TP=" << c.tp << " FP=" << c.fp << " FN=" << c.fn << " precision=" << format4(c.precision())
        << " recall=" << format4(c.recall()) << '\n';
  };
  line("action", r.action_counts);
  line("grouping", r.grouping_counts);
  line("g-act (mode 1)", r.gact1_counts);
  line("g-act (mode 2)", r.gact2_counts);
}

}  // namespace groupact

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

#include <algorithm>
#include <span>

#include <Eigen/Dense>

#include "groupact/types.hpp"

namespace groupact {

struct PairGeometry {
  double iou = 0;
  double giou = 0;
  double d_g = 0;
};

namespace detail {

inline double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double h = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  return (w > 0 && h > 0) ? w * h : 0.0;
}

inline double hull_area(const BoundingBox& a, const BoundingBox& b) {
  return (std::max(a.right(), b.right()) - std::min(a.x, b.x)) *
         (std::max(a.bottom(), b.bottom()) - std::min(a.y, b.y));
}

}  // namespace detail

inline PairGeometry pair_geometry(const BoundingBox& a, const BoundingBox& b) {
  const double inter = detail::intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  const double hull = detail::hull_area(a, b);
  PairGeometry g;
  g.iou = inter / uni;
  g.giou = g.iou - (hull - uni) / hull;
  g.giou = std::clamp(g.giou, -1.0, 1.0);
  g.d_g = (g.giou + 1.0) / 2.0;
  return g;
}

inline double iou(const BoundingBox& a, const BoundingBox& b) { return pair_geometry(a, b).iou; }

/// Generalized IoU: IoU minus the share of the enclosing box not covered by
/// the union. In [-1, 1].
inline double giou(const BoundingBox& a, const BoundingBox& b) { return pair_geometry(a, b).giou; }

/// GIoU mapped onto [0, 1]; 1 for identical boxes, tends to 0 far apart.
inline double d_g(const BoundingBox& a, const BoundingBox& b) { return pair_geometry(a, b).d_g; }

/// Symmetric matrix of d_g over all pairs, unit diagonal.
inline Eigen::MatrixXd pairwise_geometry_matrix(std::span<const BoundingBox> boxes) {
  const auto n = static_cast<Eigen::Index>(boxes.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      m(i, j) = m(j, i) = d_g(boxes[static_cast<std::size_t>(i)], boxes[static_cast<std::size_t>(j)]);
  return m;
}

}  // namespace groupact

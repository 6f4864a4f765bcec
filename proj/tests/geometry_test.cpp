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

#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "groupact/geometry.hpp"

namespace groupact {
namespace {

bool inside(const BoundingBox& b, double x, double y) { return x >= b.x && x < b.right() && y >= b.y && y < b.bottom(); }

// Monte-Carlo IoU and GIoU: uniform samples over the enclosing box.
std::pair<double, double> sampled_iou_giou(const BoundingBox& a, const BoundingBox& b, int samples,
                                           std::mt19937_64& rng) {
  const double x0 = std::min(a.x, b.x), x1 = std::max(a.right(), b.right());
  const double y0 = std::min(a.y, b.y), y1 = std::max(a.bottom(), b.bottom());
  std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
  int in_a = 0, in_b = 0, both = 0;
  for (int s = 0; s < samples; ++s) {
    const double x = ux(rng), y = uy(rng);
    const bool pa = inside(a, x, y), pb = inside(b, x, y);
    in_a += pa;
    in_b += pb;
    both += pa && pb;
  }
  const double uni = in_a + in_b - both;
  const double iou = both / uni;
  return {iou, iou - (samples - uni) / samples};
}

TEST(Iou, Examples) {
  const BoundingBox a{0, 0, 2, 2}, b{1, 0, 2, 2};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, {10, 10, 1, 1}), 0.0);
  EXPECT_NEAR(iou(a, b), 2.0 / 6.0, 1e-15);
}

TEST(Giou, Examples) {
  EXPECT_DOUBLE_EQ(giou({0, 0, 2, 2}, {0, 0, 2, 2}), 1.0);
  EXPECT_NEAR(giou({0, 0, 1, 1}, {2, 0, 1, 1}), -1.0 / 3.0, 1e-15);
  EXPECT_NEAR(giou({0, 0, 2, 2}, {1, 0, 2, 2}), 1.0 / 3.0, 1e-15);
}

TEST(Dg, Examples) {
  EXPECT_DOUBLE_EQ(d_g({3, 4, 5, 6}, {3, 4, 5, 6}), 1.0);
  EXPECT_NEAR(d_g({0, 0, 2, 2}, {1, 0, 2, 2}), 2.0 / 3.0, 1e-15);
  EXPECT_LT(d_g({0, 0, 1, 1}, {1e9, 0, 1, 1}), 1e-8);
}

TEST(Geometry, MonteCarloAgreement) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pos(0, 10), size(0.5, 6);
  for (int t = 0; t < 30; ++t) {
    const BoundingBox a{pos(rng), pos(rng), size(rng), size(rng)};
    const BoundingBox b{pos(rng), pos(rng), size(rng), size(rng)};
    const auto [mi, mg] = sampled_iou_giou(a, b, 200000, rng);
    EXPECT_NEAR(iou(a, b), mi, 0.01) << t;
    EXPECT_NEAR(giou(a, b), mg, 0.01) << t;
  }
}

TEST(Geometry, SymmetryAndInvariance) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(-50, 50), size(1, 20), shift(-100, 100), scale(0.1, 10);
  for (int t = 0; t < 500; ++t) {
    const BoundingBox a{pos(rng), pos(rng), size(rng), size(rng)};
    const BoundingBox b{pos(rng), pos(rng), size(rng), size(rng)};
    EXPECT_DOUBLE_EQ(iou(a, b), iou(b, a));
    EXPECT_DOUBLE_EQ(giou(a, b), giou(b, a));
    EXPECT_DOUBLE_EQ(d_g(a, b), d_g(b, a));
    const double dx = shift(rng), dy = shift(rng), s = scale(rng);
    const BoundingBox at{a.x + dx, a.y + dy, a.w, a.h}, bt{b.x + dx, b.y + dy, b.w, b.h};
    EXPECT_NEAR(iou(at, bt), iou(a, b), 1e-9);
    EXPECT_NEAR(giou(at, bt), giou(a, b), 1e-9);
    EXPECT_NEAR(d_g(at, bt), d_g(a, b), 1e-9);
    const BoundingBox as{a.x * s, a.y * s, a.w * s, a.h * s}, bs{b.x * s, b.y * s, b.w * s, b.h * s};
    EXPECT_NEAR(iou(as, bs), iou(a, b), 1e-9);
    EXPECT_NEAR(giou(as, bs), giou(a, b), 1e-9);
    EXPECT_LE(giou(a, b), iou(a, b) + 1e-15);
  }
}

TEST(Geometry, GiouEqualsIouWhenHullIsUnion) {
  const BoundingBox a{0, 0, 4, 2}, b{2, 0, 4, 2};  // side by side, same height
  EXPECT_DOUBLE_EQ(giou(a, b), iou(a, b));
  const BoundingBox c{0, 0, 2, 2}, d{1, 1, 2, 2};  // diagonal offset leaves hull corners empty
  EXPECT_LT(giou(c, d), iou(c, d));
}

TEST(Geometry, DgDecreasesWithDistance) {
  const BoundingBox a{0, 0, 2, 2};
  double prev = 2;
  for (double x = 0; x < 30; x += 0.25) {
    const double v = d_g(a, {x, 0, 2, 2});
    if (x > 2) {
      EXPECT_LT(v, prev) << x;
    } else {
      EXPECT_LE(v, prev) << x;
    }
    prev = v;
  }
}

TEST(PairwiseMatrix, SmallCases) {
  std::vector<BoundingBox> one{{0, 0, 1, 1}};
  EXPECT_EQ(pairwise_geometry_matrix(one), Eigen::MatrixXd::Ones(1, 1));
  std::vector<BoundingBox> twins{{0, 0, 1, 1}, {0, 0, 1, 1}};
  EXPECT_EQ(pairwise_geometry_matrix(twins), Eigen::MatrixXd::Ones(2, 2));
  std::vector<BoundingBox> three{{0, 0, 2, 2}, {1, 0, 2, 2}, {4, 0, 2, 2}};
  const auto m = pairwise_geometry_matrix(three);
  EXPECT_NEAR(m(0, 1), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(m(0, 2), d_g(three[0], three[2]), 1e-15);
  EXPECT_NEAR(m(0, 2), 1.0 / 3.0, 1e-15);  // hull 12, union 8
  EXPECT_EQ(m, m.transpose());
  EXPECT_EQ(m.diagonal(), Eigen::VectorXd::Ones(3));
}

}  // namespace
}  // namespace groupact

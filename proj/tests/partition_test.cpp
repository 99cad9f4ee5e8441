#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "polyrecon/partition.hpp"

namespace polyrecon {
namespace {

using testing::polygon_plane;
using testing::rect_plane;

std::vector<DetectedPlane> box_planes(const Vec3& lo, const Vec3& hi) {
  std::vector<DetectedPlane> out;
  for (const auto& f : testing::box_faces(lo, hi)) out.push_back(polygon_plane(f));
  return out;
}

double cells_volume(const CellComplex& cx) {
  double v = 0.0;
  for (const auto& c : cx.cells) v += testing::signed_volume_oracle(c);
  return v;
}

CellComplex partition_all(const std::vector<DetectedPlane>& planes, double sigma) {
  const auto cls = classify_planes(planes, sigma);
  Aabb box;
  for (const auto& p : planes)
    for (const auto& b : p.footprint.boundary_points()) box.extend(b);
  const auto space = build_convex_space(cls, box);
  return adaptive_partition(space, planes, cls.internal);
}

TEST(Classify, CubeWithInternalPlane) {
  auto planes = box_planes({0, 0, 0}, {1, 1, 1});
  planes.push_back(rect_plane({0.5, 0, 0}, {0, 1, 0}, {0, 0, 1}));
  const auto cls = classify_planes(planes, 1e-3);
  EXPECT_EQ(cls.external, (std::vector<int>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(cls.internal, (std::vector<int>{6}));
  for (int id : cls.external) {
    // Outward: the cube centre is on the negative side.
    EXPECT_LT(cls.oriented[id].signed_distance({0.5, 0.5, 0.5}), 0.0);
  }
}

TEST(Classify, FlippedInputNormalsStillOutward) {
  auto planes = box_planes({0, 0, 0}, {1, 1, 1});
  for (auto& p : planes) p.plane = p.plane.flipped();
  const auto cls = classify_planes(planes, 1e-3);
  ASSERT_EQ(cls.external.size(), 6u);
  for (int id : cls.external) EXPECT_LT(cls.oriented[id].signed_distance({0.5, 0.5, 0.5}), 0.0);
}

TEST(Classify, LeakBelowSigmaIgnored) {
  const double sigma = 0.01;
  for (double leak : {0.5 * sigma, 2.0 * sigma}) {
    auto planes = box_planes({0, 0, 0}, {1, 1, 1});
    planes.push_back(rect_plane({-leak, 0, 0.5}, {1 + leak, 0, 0}, {0, 1, 0}));
    const auto cls = classify_planes(planes, sigma);
    const bool x0_external = std::find(cls.external.begin(), cls.external.end(), 0) != cls.external.end();
    EXPECT_EQ(x0_external, leak < sigma) << leak;
  }
}

TEST(Classify, TooFewExternal) {
  std::vector<DetectedPlane> planes;
  for (int i = 0; i < 4; ++i) planes.push_back(rect_plane({double(i), 0, 0}, {0, 1, 0}, {0, 0, 1}));
  try {
    classify_planes(planes, 1e-3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateConfiguration);
  }
  EXPECT_THROW(classify_planes(std::vector<DetectedPlane>(3), 1e-3), Error);
}

TEST(ConvexSpace, CubeIsTheCube) {
  const auto planes = box_planes({0, 0, 0}, {1, 1, 1});
  const auto cls = classify_planes(planes, 1e-3);
  Aabb box{{0, 0, 0}, {1, 1, 1}};
  const auto space = build_convex_space(cls, box);
  EXPECT_NEAR(testing::signed_volume_oracle(space), 1.0, 1e-9);
  EXPECT_EQ(space.faces.size(), 6u);
  for (int s : space.source_planes) EXPECT_GE(s, 0);
  EXPECT_TRUE(is_watertight(space));
}

TEST(ConvexSpace, Tetrahedron) {
  const Vec3 a{0, 0, 0}, b{1, 0, 0}, c{0, 1, 0}, d{0, 0, 1};
  auto tri = [](Vec3 p, Vec3 q, Vec3 r) {
    ConvexPolygon g;
    g.vertices = {p, q, r};
    g.plane = Plane::through(p, ring_area_vector(g.vertices));
    return polygon_plane(g);
  };
  std::vector<DetectedPlane> planes{tri(a, c, b), tri(a, b, d), tri(a, d, c), tri(b, c, d)};
  const auto cls = classify_planes(planes, 1e-3);
  ASSERT_EQ(cls.external.size(), 4u);
  const auto space = build_convex_space(cls, Aabb{{0, 0, 0}, {1, 1, 1}});
  EXPECT_NEAR(testing::signed_volume_oracle(space), 1.0 / 6.0, 1e-9);
}

TEST(ConvexSpace, OpenTopIsUnbounded) {
  auto planes = box_planes({0, 0, 0}, {1, 1, 1});
  planes.erase(planes.begin() + 5);  // +z
  const auto cls = classify_planes(planes, 1e-3);
  ASSERT_EQ(cls.external.size(), 5u);
  try {
    build_convex_space(cls, Aabb{{0, 0, 0}, {1, 1, 1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnboundedSpace);
    EXPECT_NE(std::string(e.what()).find("+z"), std::string::npos) << e.what();
  }
}

// Four vertical walls inside [0,4]^2 x [0,1]:
//   F1 x=1, y in [1.5,4]; F2 y=2, x in [0,4]; F3 x=3; F4 y=3, x in [2,4].
std::vector<DetectedPlane> walls() {
  return {rect_plane({1, 1.5, 0}, {0, 2.5, 0}, {0, 0, 1}), rect_plane({0, 2, 0}, {4, 0, 0}, {0, 0, 1}),
          rect_plane({3, 0, 0}, {0, 4, 0}, {0, 0, 1}), rect_plane({2, 3, 0}, {2, 0, 0}, {0, 0, 1})};
}

TEST(Partition, IntersectionCountsOfWalls) {
  const auto space = make_box({0, 0, 0}, {4, 4, 1});
  EXPECT_EQ(count_intersections(walls(), space, 1e-6), (std::vector<int>{1, 2, 2, 2}));
}

TEST(Partition, WallsSplitCheapestFirst) {
  auto planes = box_planes({0, 0, 0}, {4, 4, 1});
  for (auto& w : walls()) planes.push_back(w);
  const auto cx = partition_all(planes, 1e-3);
  ASSERT_FALSE(cx.split_order.empty());
  EXPECT_EQ(cx.split_order.front(), 6);
  EXPECT_EQ(cx.cells.size(), 8u);
  EXPECT_NEAR(cells_volume(cx), 16.0, 1e-9);
}

TEST(Partition, NoInternalPlanesGivesOneCell) {
  const auto planes = box_planes({0, 0, 0}, {1, 1, 1});
  const auto cx = partition_all(planes, 1e-3);
  EXPECT_EQ(cx.cells.size(), 1u);
  EXPECT_TRUE(cx.adjacency.empty());
  EXPECT_EQ(cx.hull_faces.size(), 6u);
}

TEST(Partition, ParallelPlanesGiveSlabs) {
  auto planes = box_planes({0, 0, 0}, {3, 1, 1});
  planes.push_back(rect_plane({1, 0, 0}, {0, 1, 0}, {0, 0, 1}));
  planes.push_back(rect_plane({2, 0, 0}, {0, 1, 0}, {0, 0, 1}));
  const auto cx = partition_all(planes, 1e-3);
  ASSERT_EQ(cx.cells.size(), 3u);
  for (const auto& c : cx.cells) EXPECT_NEAR(testing::signed_volume_oracle(c), 1.0, 1e-9);
  ASSERT_EQ(cx.adjacency.size(), 2u);
  for (const auto& a : cx.adjacency) {
    EXPECT_NEAR(a.polygon.area(), 1.0, 1e-9);
    // Normal points from a into b.
    const Vec3 ca = cx.cells[a.cell_a].centroid, cb = cx.cells[a.cell_b].centroid;
    EXPECT_GT(dot(cb - ca, a.polygon.plane.normal), 0.0);
  }
  EXPECT_EQ(cx.hull_faces.size(), 3u * 4u + 2u);
}

TEST(Partition, HalfPlaneEntersOneSideOnly) {
  auto planes = box_planes({0, 0, 0}, {2, 1, 1});
  planes.push_back(rect_plane({1, 0, 0}, {0, 1, 0}, {0, 0, 1}));
  planes.push_back(rect_plane({1, 0, 0.5}, {-1, 0, 0}, {0, 1, 0}));
  const auto cx = partition_all(planes, 1e-3);
  EXPECT_EQ(cx.split_order, (std::vector<int>{6, 7}));
  EXPECT_EQ(cx.cells.size(), 3u);
  EXPECT_NEAR(cells_volume(cx), 2.0, 1e-9);
}

TEST(Partition, CoplanarFragmentsSplitOnce) {
  auto planes = box_planes({0, 0, 0}, {2, 1, 1});
  planes.push_back(rect_plane({1, 0, 0}, {0, 0.5, 0}, {0, 0, 1}));
  planes.push_back(rect_plane({1, 0.5, 0}, {0, 0.5, 0}, {0, 0, 1}));
  const auto cx = partition_all(planes, 1e-3);
  EXPECT_EQ(cx.cells.size(), 2u);
  ASSERT_EQ(cx.adjacency.size(), 1u);
  EXPECT_NEAR(cx.adjacency[0].polygon.area(), 1.0, 1e-9);
}

// Random internal rectangles in a cube: conservation, cell validity,
// adjacency covering each internal face exactly once from each side.
TEST(Partition, RandomInvariants) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.3, 0.7);
  for (int trial = 0; trial < 20; ++trial) {
    auto planes = box_planes({0, 0, 0}, {1, 1, 1});
    const int k = 2 + trial % 5;
    for (int i = 0; i < k; ++i) {
      const Vec3 n = testing::random_unit(rng);
      const Vec3 c{u(rng), u(rng), u(rng)};
      const PlaneFrame fr(Plane::through(c, n), c);
      const double h = 0.1 + 0.25 * (u(rng) - 0.3);
      planes.push_back(rect_plane(c - fr.u * h - fr.v * h, fr.u * (2 * h), fr.v * (2 * h)));
    }
    const auto cx = partition_all(planes, 1e-3);
    EXPECT_NEAR(cells_volume(cx), 1.0, 1e-9) << trial;
    std::vector<double> internal_area(cx.cells.size(), 0.0), adj_area(cx.cells.size(), 0.0);
    for (std::size_t c = 0; c < cx.cells.size(); ++c) {
      const auto& cell = cx.cells[c];
      EXPECT_TRUE(is_watertight(cell)) << trial;
      EXPECT_TRUE(is_convex(cell, 1e-9)) << trial;
      EXPECT_GT(testing::signed_volume_oracle(cell), 0.0);
      for (std::size_t f = 0; f < cell.faces.size(); ++f)
        if (cell.source_planes[f] >= 6) internal_area[c] += cell.faces[f].area();
    }
    for (const auto& a : cx.adjacency) {
      adj_area[a.cell_a] += a.polygon.area();
      adj_area[a.cell_b] += a.polygon.area();
      EXPECT_NE(a.cell_a, a.cell_b);
    }
    for (std::size_t c = 0; c < cx.cells.size(); ++c) EXPECT_NEAR(internal_area[c], adj_area[c], 1e-8) << trial;
    // Deterministic.
    const auto again = partition_all(planes, 1e-3);
    EXPECT_EQ(again.split_order, cx.split_order);
    ASSERT_EQ(again.cells.size(), cx.cells.size());
    for (std::size_t c = 0; c < cx.cells.size(); ++c)
      EXPECT_EQ(again.cells[c].volume(), cx.cells[c].volume());
  }
}

}  // namespace
}  // namespace polyrecon

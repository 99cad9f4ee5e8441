#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "polyrecon/point_cloud.hpp"
#include "polyrecon/poly_mesh.hpp"

namespace {

using namespace polyrecon;
namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("polyrecon_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::DegenerateInput;
}

// ---------------------------------------------------------------- load_cloud

TEST(LoadCloud, ThreeLineXyz) {
  TempDir dir;
  write_text(dir / "a.xyz", "# header\n0 0 0\n1 0 0\n\n0 1 0.5\n");
  const PointCloud c = load_cloud(dir / "a.xyz");
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.points[2], (Vec3{0, 1, 0.5}));
  EXPECT_DOUBLE_EQ(c.avg_spacing, 1.0);
}

TEST(LoadCloud, NanIsParseErrorWithLine) {
  TempDir dir;
  write_text(dir / "b.xyz", "0 0 0\n1 nan 0\n");
  try {
    load_cloud(dir / "b.xyz");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
}

TEST(LoadCloud, EmptyAndCommentOnlyFiles) {
  TempDir dir;
  write_text(dir / "empty.xyz", "");
  write_text(dir / "comments.xyz", "# nothing\n\n");
  EXPECT_EQ(kind_of([&] { load_cloud(dir / "empty.xyz"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([&] { load_cloud(dir / "comments.xyz"); }), ErrorKind::EmptyCloud);
  EXPECT_EQ(kind_of([&] { load_cloud(dir / "missing.xyz"); }), ErrorKind::IoError);
}

TEST(LoadCloud, BinaryPlyMatchesAsciiTwin) {
  TempDir dir;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(-10.f, 10.f);
  std::vector<std::array<float, 3>> pts(200);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};

  // Extra properties and a leading element exercise the skipping logic.
  const std::string head_common =
      "comment twin\nelement camera 1\nproperty float f\nelement vertex 200\n"
      "property uchar red\nproperty float x\nproperty float y\nproperty float z\n"
      "property list uchar int extra\nend_header\n";
  {
    std::ofstream out(dir / "a.ply", std::ios::binary);
    out << "ply\nformat ascii 1.0\n" << head_common << "1.5\n";
    char buf[128];
    for (const auto& p : pts) {
      std::snprintf(buf, sizeof buf, "7 %.9g %.9g %.9g 2 4 5\n", p[0], p[1], p[2]);
      out << buf;
    }
  }
  {
    std::ofstream out(dir / "b.ply", std::ios::binary);
    out << "ply\nformat binary_little_endian 1.0\n" << head_common;
    const float cam = 1.5f;
    out.write(reinterpret_cast<const char*>(&cam), 4);
    for (const auto& p : pts) {
      const unsigned char red = 7, cnt = 2;
      const int ex[2] = {4, 5};
      out.write(reinterpret_cast<const char*>(&red), 1);
      out.write(reinterpret_cast<const char*>(p.data()), 12);
      out.write(reinterpret_cast<const char*>(&cnt), 1);
      out.write(reinterpret_cast<const char*>(ex), 8);
    }
  }
  const PointCloud a = load_cloud(dir / "a.ply");
  const PointCloud b = load_cloud(dir / "b.ply");
  ASSERT_EQ(a.size(), 200u);
  EXPECT_EQ(a.points, b.points);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(b.points[i].x, static_cast<double>(pts[i][0]));
}

TEST(LoadCloud, TruncatedBinaryPly) {
  TempDir dir;
  {
    std::ofstream out(dir / "t.ply", std::ios::binary);
    out << "ply\nformat binary_little_endian 1.0\nelement vertex 2\nproperty double x\nproperty double y\n"
           "property double z\nend_header\n";
    const double v[4] = {1, 2, 3, 4};
    out.write(reinterpret_cast<const char*>(v), sizeof v);
  }
  try {
    load_cloud(dir / "t.ply");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
  }
}

TEST(LoadCloud, SaveRoundTripIsExact) {
  TempDir dir;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<Vec3> pts(300);
  for (auto& p : pts) p = {g(rng), g(rng), g(rng)};
  save_cloud_xyz(pts, dir / "p.xyz");
  save_cloud_ply(pts, dir / "p.ply", true);
  save_cloud_ply(pts, dir / "q.ply", false);
  EXPECT_EQ(load_cloud(dir / "p.xyz").points, pts);
  EXPECT_EQ(load_cloud(dir / "p.ply").points, pts);
  EXPECT_EQ(load_cloud(dir / "q.ply").points, pts);
}

// ---------------------------------------------------------------- poisson_resample

std::vector<Vec3> grid3(int n, double s) {
  std::vector<Vec3> pts;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) pts.push_back({i * s, j * s, k * s});
  return pts;
}

TEST(PoissonResample, GridAtHalfSpacingKeepsAll) {
  const PointCloud c = make_cloud(grid3(12, 0.1));
  EXPECT_EQ(poisson_resample(c, 0.05, 3).size(), c.size());
}

TEST(PoissonResample, DuplicatedCloudKeepsOneCopy) {
  auto pts = grid3(6, 1.0);
  const std::size_t n = pts.size();
  auto twice = pts;
  twice.insert(twice.end(), pts.begin(), pts.end());
  const PointCloud c = make_cloud(twice, false);
  ASSERT_EQ(c.size(), 2 * n);
  const PointCloud r = poisson_resample(c, 1e-9, 4);
  ASSERT_EQ(r.size(), n);
  std::set<std::tuple<double, double, double>> seen;
  for (const auto& p : r.points) seen.insert({p.x, p.y, p.z});
  EXPECT_EQ(seen.size(), n);
}

TEST(PoissonResample, MinimumDistanceAndMaximality) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> pts(5000);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  const PointCloud c = make_cloud(pts);
  const double r = 0.07;
  const PointCloud s = poisson_resample(c, r, 9);
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j) ASSERT_GE(distance(s.points[i], s.points[j]), r);
  for (const auto& p : c.points) {
    double best = 1e300;
    for (const auto& q : s.points) best = std::min(best, distance(p, q));
    ASSERT_LT(best, r);
  }
  // Subset of the input.
  std::set<std::tuple<double, double, double>> in;
  for (const auto& p : c.points) in.insert({p.x, p.y, p.z});
  for (const auto& p : s.points) ASSERT_TRUE(in.count({p.x, p.y, p.z}));
}

TEST(PoissonResample, DeterministicUnderSeed) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> pts(3000);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  const PointCloud c = make_cloud(pts);
  EXPECT_EQ(poisson_resample(c, 0.05, 11).points, poisson_resample(c, 0.05, 11).points);
  EXPECT_NE(poisson_resample(c, 0.05, 11).points, poisson_resample(c, 0.05, 12).points);
}

// Plain O(n * kept) dart throwing over a shuffled order.
std::size_t brute_dart_count(const std::vector<Vec3>& pts, double r, std::uint64_t seed) {
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937 rng(static_cast<std::uint32_t>(seed));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Vec3> kept;
  for (auto i : order) {
    bool ok = true;
    for (const auto& q : kept)
      if (squared_distance(pts[i], q) < r * r) {
        ok = false;
        break;
      }
    if (ok) kept.push_back(pts[i]);
  }
  return kept.size();
}

TEST(PoissonResample, RandomCubeCountMatchesDartOracleRange) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> pts(10000);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  const PointCloud c = make_cloud(pts);
  std::size_t lo = SIZE_MAX, hi = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = brute_dart_count(c.points, 0.1, seed);
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }
  EXPECT_GE(lo, 500u);
  EXPECT_LE(hi, 900u);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = poisson_resample(c, 0.1, seed).size();
    EXPECT_GE(n, 500u);
    EXPECT_LE(n, 900u);
    // Same distribution as the oracle, so within a small margin of its range.
    EXPECT_GE(n + 30, lo);
    EXPECT_LE(n, hi + 30);
  }
}

// ---------------------------------------------------------------- remove_outliers

std::set<std::size_t> brute_outliers(const std::vector<Vec3>& pts, std::size_t k) {
  const std::size_t n = pts.size();
  std::vector<std::vector<std::size_t>> nb(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) d.push_back({squared_distance(pts[i], pts[j]), j});
    std::sort(d.begin(), d.end());
    for (std::size_t t = 0; t < std::min(k, d.size()); ++t) nb[i].push_back(d[t].second);
  }
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (auto j : nb[i])
      if (std::find(nb[j].begin(), nb[j].end(), i) != nb[j].end()) any = true;
    if (!any) out.insert(i);
  }
  return out;
}

TEST(RemoveOutliers, FarPointRemovedClusterIntact) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Vec3> pts(300);
  for (auto& p : pts) p = {g(rng), g(rng), g(rng)};
  const PointCloud base = make_cloud(pts);
  pts.push_back({100.0 * base.avg_spacing + 5.0, 0, 0});
  const auto oracle = brute_outliers(pts, 8);
  const auto got = outlier_indices(pts, 8);
  EXPECT_EQ(std::set<std::size_t>(got.begin(), got.end()), oracle);
  EXPECT_TRUE(oracle.count(300));
  const PointCloud filtered = remove_outliers(make_cloud(pts), 8);
  EXPECT_EQ(filtered.size(), pts.size() - oracle.size());
  EXPECT_TRUE(std::none_of(filtered.points.begin(), filtered.points.end(),
                           [&](const Vec3& p) { return p == pts.back(); }));
}

TEST(RemoveOutliers, TwoPointsAreMutual) {
  const PointCloud c = make_cloud({{0, 0, 0}, {1, 0, 0}});
  EXPECT_EQ(remove_outliers(c, 1).size(), 2u);
}

TEST(RemoveOutliers, UniformGridKeepsEverything) {
  const auto pts = grid3(8, 0.5);
  EXPECT_TRUE(brute_outliers(pts, 4).empty());
  EXPECT_TRUE(outlier_indices(pts, 4).empty());
}

TEST(RemoveOutliers, MatchesBruteForceOn200Clouds) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> size(20, 1000);
  std::uniform_int_distribution<int> kk(1, 20);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 0.05);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = size(rng);
    std::vector<Vec3> pts;
    // Clustered points plus sparse background to produce real outliers.
    const int clusters = 1 + trial % 4;
    for (int i = 0; i < n; ++i) {
      if (i % 10 == 0) {
        pts.push_back({u(rng) * 3, u(rng) * 3, u(rng) * 3});
      } else {
        const double c = (i % clusters);
        pts.push_back({c + g(rng), c + g(rng), g(rng)});
      }
    }
    const std::size_t k = std::min<std::size_t>(kk(rng), pts.size() - 1);
    const auto got = outlier_indices(pts, k);
    ASSERT_EQ(std::set<std::size_t>(got.begin(), got.end()), brute_outliers(pts, k)) << "trial " << trial;
  }
}

TEST(RemoveOutliers, FilterShrinksMonotonically) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> pts(2000);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng) * 0.01};
  for (int i = 0; i < 40; ++i) pts.push_back({u(rng), u(rng), u(rng)});
  const PointCloud c = make_cloud(pts);
  const PointCloud once = remove_outliers(c, 16);
  const PointCloud twice = remove_outliers(once, 16);
  EXPECT_LT(once.size(), c.size());
  EXPECT_LE(twice.size(), once.size());
  std::set<std::tuple<double, double, double>> a;
  for (const auto& p : once.points) a.insert({p.x, p.y, p.z});
  for (const auto& p : twice.points) EXPECT_TRUE(a.count({p.x, p.y, p.z}));
}

// ---------------------------------------------------------------- save_mesh

PolyMesh cube_mesh() {
  PolyMesh m;
  for (int i = 0; i < 8; ++i) m.vertices.push_back({double(i & 1), double((i >> 1) & 1), double((i >> 2) & 1)});
  m.faces = {{0, 4, 6, 2}, {1, 3, 7, 5}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 2, 3, 1}, {4, 5, 7, 6}};
  m.face_planes = {0, 1, 2, 3, 4, 5};
  m.face_candidate = {1, 1, 1, 1, 0, 1};
  return m;
}

TEST(SaveMesh, CubeObjRecords) {
  TempDir dir;
  const PolyMesh m = cube_mesh();
  EXPECT_TRUE(is_watertight(m));
  EXPECT_EQ(euler_characteristic(m), 2);
  save_mesh(m, dir / "cube.obj");
  std::ifstream in(dir / "cube.obj");
  std::string line;
  int v = 0, f = 0, other = 0;
  while (std::getline(in, line)) {
    if (line.rfind("v ", 0) == 0) ++v;
    else if (line.rfind("f ", 0) == 0) ++f;
    else ++other;
  }
  EXPECT_EQ(v, 8);
  EXPECT_EQ(f, 6);
  EXPECT_EQ(other, 0);
  const PolyMesh back = load_mesh(dir / "cube.obj");
  EXPECT_EQ(back.faces, m.faces);
  for (std::size_t i = 0; i < m.vertices.size(); ++i) EXPECT_LT(distance(back.vertices[i], m.vertices[i]), 1e-9);
}

TEST(SaveMesh, PentagonStaysOneFace) {
  TempDir dir;
  PolyMesh m;
  for (int i = 0; i < 5; ++i) {
    const double a = 2.0 * 3.141592653589793 * i / 5;
    m.vertices.push_back({std::cos(a), std::sin(a), 0});
  }
  m.faces = {{0, 1, 2, 3, 4}};
  save_mesh(m, dir / "p.obj");
  std::ifstream in(dir / "p.obj");
  std::string line, face;
  while (std::getline(in, line))
    if (line.rfind("f ", 0) == 0) face = line;
  EXPECT_EQ(face, "f 1 2 3 4 5");
}

TEST(SaveMesh, PlyRoundTripKeepsTopologyAndAttributes) {
  TempDir dir;
  PolyMesh m = cube_mesh();
  m.vertices[3].x = 0.1 + 0.2;  // not exactly representable in short decimal
  save_mesh(m, dir / "cube.ply");
  const PolyMesh back = load_mesh(dir / "cube.ply");
  EXPECT_EQ(back.faces, m.faces);
  EXPECT_EQ(back.vertices, m.vertices);
  EXPECT_EQ(back.face_planes, m.face_planes);
  EXPECT_EQ(back.face_candidate, m.face_candidate);
}

TEST(SaveMesh, UnwritablePathIsIoError) {
  EXPECT_EQ(kind_of([] { save_mesh(cube_mesh(), "/nonexistent-dir/x.obj"); }), ErrorKind::IoError);
}

}  // namespace

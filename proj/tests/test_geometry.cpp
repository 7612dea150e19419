#include <doctest.h>

#include <cmath>

#include "cadseq/cad/quantize.hpp"
#include "cadseq/geom/extrude.hpp"
#include "cadseq/geom/pointcloud.hpp"
#include "cadseq/geom/polyline.hpp"
#include "cadseq/geom/voxel.hpp"
#include "cadseq/util/error.hpp"
#include "cadseq/util/rng.hpp"
#include "test_helpers.hpp"

using namespace cadseq;
using namespace cadseq::cad;
using namespace cadseq::geom;
using namespace testutil;

namespace {

double deq_sketch(int bin) { return dequantize_slot(kSlotX, bin); }

// circumcenter of three points (perpendicular-bisector intersection)
Vec2 circumcenter(Vec2 a, Vec2 b, Vec2 c) {
  const double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
  const double ux = ((a.x * a.x + a.y * a.y) * (b.y - c.y) +
                     (b.x * b.x + b.y * b.y) * (c.y - a.y) +
                     (c.x * c.x + c.y * c.y) * (a.y - b.y)) /
                    d;
  const double uy = ((a.x * a.x + a.y * a.y) * (c.x - b.x) +
                     (b.x * b.x + b.y * b.y) * (a.x - c.x) +
                     (c.x * c.x + c.y * c.y) * (b.x - a.x)) /
                    d;
  return {ux, uy};
}

double brute_chamfer(const PointCloud& p, const PointCloud& q) {
  double spq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double dx = p.xs[i] - q.xs[j];
      const double dy = p.ys[i] - q.ys[j];
      const double dz = p.zs[i] - q.zs[j];
      const double d2 = dx * dx + dy * dy + dz * dz;
      if (d2 < best) best = d2;
    }
    spq += best;
  }
  double sqp = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double dx = q.xs[j] - p.xs[i];
      const double dy = q.ys[j] - p.ys[i];
      const double dz = q.zs[j] - p.zs[i];
      const double d2 = dx * dx + dy * dy + dz * dz;
      if (d2 < best) best = d2;
    }
    sqp += best;
  }
  return spq / double(p.size()) + sqp / double(q.size());
}

PointCloud random_cloud(Rng& rng, int n) {
  PointCloud c;
  for (int i = 0; i < n; ++i)
    c.push_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  return c;
}

VoxelGrid random_grid(Rng& rng, int res, double fill) {
  VoxelGrid g(res);
  for (int x = 0; x < res; ++x)
    for (int y = 0; y < res; ++y)
      for (int z = 0; z < res; ++z)
        if (rng.bernoulli(fill)) g.set(x, y, z, true);
  return g;
}

}  // namespace

TEST_CASE("discretize: unit square gives 4 points") {
  const auto loop = square_loop();
  const LoopPolyline poly = discretize_loop(loop, 16);
  REQUIRE(poly.points.size() == 4);
  const double lo = deq_sketch(64), hi = deq_sketch(192);
  CHECK(poly.points[0].x == doctest::Approx(hi));
  CHECK(poly.points[0].y == doctest::Approx(lo));
  CHECK(poly.points[3].x == doctest::Approx(lo));
  CHECK(std::abs(poly.signed_area()) == doctest::Approx(1.0));  // side is exactly 1.0
}

TEST_CASE("discretize: circle becomes a regular 4*arc_segments-gon on the circle") {
  const std::vector<CadCommand> loop = {CadCommand::sol(), CadCommand::circle(127, 127, 230)};
  const LoopPolyline poly = discretize_loop(loop, 16);
  REQUIRE(poly.points.size() == 64);
  const double cx = deq_sketch(127), cy = deq_sketch(127);
  const double r = deq_sketch(230);
  for (const Vec2& p : poly.points)
    CHECK(std::hypot(p.x - cx, p.y - cy) == doctest::Approx(r).epsilon(1e-12));
}

TEST_CASE("discretize: arc against the closed-form sweep oracle") {
  // near-semicircle between two points 1.0 apart; c=1 must bulge upward
  const int theta_bin = 127;  // dequantizes just below pi
  const std::vector<CadCommand> loop = {
      CadCommand::sol(),
      CadCommand::arc(192, 64, theta_bin, 1),  // chain start at (64,64) endpoint below
      CadCommand::line(64, 64),
  };
  const int segs = 16;
  const LoopPolyline poly = discretize_loop(loop, segs);
  REQUIRE(poly.points.size() == static_cast<std::size_t>(segs) + 1);

  const Vec2 s{deq_sketch(64), deq_sketch(64)};
  const Vec2 e{deq_sketch(192), deq_sketch(64)};
  const double theta = dequantize_slot(kSlotTheta, theta_bin);

  // independent center: circumcenter of (start, some interior vertex, end)
  const Vec2 c = circumcenter(s, poly.points[segs / 2 - 1], e);
  const double r_expected = (std::hypot(e.x - s.x, e.y - s.y) / 2.0) / std::sin(theta / 2.0);
  CHECK(std::hypot(s.x - c.x, s.y - c.y) == doctest::Approx(r_expected).epsilon(1e-9));

  // every vertex on that circle
  for (std::size_t i = 0; i + 1 < poly.points.size(); ++i)
    CHECK(std::hypot(poly.points[i].x - c.x, poly.points[i].y - c.y) ==
          doctest::Approx(r_expected).epsilon(1e-9));

  // equal angular steps summing to theta, consistently oriented; the arc's
  // vertices are points[0 .. segs-1], the trailing line contributes the last
  double total = 0.0;
  double prev = std::atan2(s.y - c.y, s.x - c.x);
  for (int i = 0; i < segs; ++i) {
    const double cur = std::atan2(poly.points[i].y - c.y, poly.points[i].x - c.x);
    const double step = std::remainder(cur - prev, 2.0 * M_PI);
    CHECK(std::abs(std::abs(step) - theta / segs) < 1e-9);
    total += step;
    prev = cur;
  }
  CHECK(std::abs(std::abs(total) - theta) < 1e-6);
  // the arc's final vertex is the exact chain endpoint
  CHECK(poly.points[segs - 1].x == e.x);
  CHECK(poly.points[segs - 1].y == e.y);
  CHECK(poly.points[segs].x == s.x);  // the closing line's endpoint
  CHECK(poly.points[segs].y == s.y);

  // c=1 bulges above the chord, c=0 mirrors below
  double apex1 = -10, apex0 = 10;
  for (const Vec2& p : poly.points) apex1 = std::max(apex1, p.y);
  CHECK(apex1 > s.y + 0.4);

  const std::vector<CadCommand> loop0 = {
      CadCommand::sol(), CadCommand::arc(192, 64, theta_bin, 0), CadCommand::line(64, 64)};
  for (const Vec2& p : discretize_loop(loop0, segs).points) apex0 = std::min(apex0, p.y);
  CHECK(apex0 < s.y - 0.4);
}

TEST_CASE("discretize: degenerate sweep and zero chord raise typed errors") {
  const std::vector<CadCommand> bad_theta = {
      CadCommand::sol(), CadCommand::arc(192, 64, 0, 1), CadCommand::line(64, 64)};
  CHECK_THROWS_AS(discretize_loop(bad_theta, 16), CadError);
  try {
    discretize_loop(bad_theta, 16);
  } catch (const CadError& e) {
    CHECK(e.kind() == ErrorKind::degenerate_arc);
  }

  const std::vector<CadCommand> zero_line = {
      CadCommand::sol(), CadCommand::line(64, 64), CadCommand::line(64, 64)};
  try {
    discretize_loop(zero_line, 16);
  } catch (const CadError& e) {
    CHECK(e.kind() == ErrorKind::open_loop);
  }
}

TEST_CASE("extrude: box voxel count against the analytic volume oracle") {
  const CadSequence seq = p1_square_sequence();
  const GeomConfig cfg;
  const VoxelGrid grid = realize(seq, 64, cfg);

  const double s = dequantize_slot(kSlotScale, 89);
  const double d = dequantize_slot(kSlotDist1, 127);
  const double h = grid.pitch();
  const double a = 1.0 * s / h;  // square side is exactly 1.0 in sketch units
  const double c = d / h;
  const double lo_bound = (a - 1) * (a - 1) * (c - 1);
  const double hi_bound = (a + 2) * (a + 2) * (c + 2);
  const double count = static_cast<double>(grid.count());
  CHECK(count >= lo_bound);
  CHECK(count <= hi_bound);
}

TEST_CASE("extrude: cut strictly decreases occupancy") {
  std::vector<CadCommand> cmds = square_loop();
  cmds.push_back(default_extrude(127, 0, kJoin, kOneSided));
  auto inner = square_loop(96, 160);  // smaller square, same center
  cmds.insert(cmds.end(), inner.begin(), inner.end());
  cmds.push_back(CadCommand::extrude(127, 127, 127, 127, 127, 127, /*s=*/89,
                                     /*d1=*/80, 0, kCut, kOneSided));
  const CadSequence seq = CadSequence::from_commands(cmds);

  std::vector<CadCommand> first_only = square_loop();
  first_only.push_back(default_extrude(127, 0, kJoin, kOneSided));
  const GeomConfig cfg;
  const VoxelGrid with_cut = realize(seq, 64, cfg);
  const VoxelGrid base = realize(CadSequence::from_commands(first_only), 64, cfg);
  CHECK(with_cut.count() < base.count());
}

TEST_CASE("extrude: join equals the union of separately realized bodies") {
  // arc+3-lines pair then a two-circle-loop pair, both joining
  std::vector<CadCommand> pair1 = {
      CadCommand::sol(),
      CadCommand::arc(192, 64, 100, 1),
      CadCommand::line(192, 192),
      CadCommand::line(64, 192),
      CadCommand::line(64, 64),
      default_extrude(100, 0, kJoin, kOneSided),
  };
  std::vector<CadCommand> pair2 = {
      CadCommand::sol(), CadCommand::circle(127, 127, 230),
      CadCommand::sol(), CadCommand::circle(127, 127, 180),
      CadCommand::extrude(127, 127, 127, 127, 127, 140, 89, 90, 0, kJoin, kSymmetric),
  };
  std::vector<CadCommand> both = pair1;
  both.insert(both.end(), pair2.begin(), pair2.end());

  const GeomConfig cfg;
  const VoxelGrid g1 = realize(CadSequence::from_commands(pair1), 64, cfg);
  const VoxelGrid g2 = realize(CadSequence::from_commands(pair2), 64, cfg);
  const VoxelGrid gb = realize(CadSequence::from_commands(both), 64, cfg);
  CHECK(gb == grid_union(g1, g2));
  CHECK(gb.count() >= g1.count());
  CHECK(gb.count() >= g2.count());
}

TEST_CASE("realize: intersect as the first op yields geometric invalidity") {
  std::vector<CadCommand> cmds = square_loop();
  cmds.push_back(default_extrude(127, 0, kIntersect, kOneSided));
  const CadSequence seq = CadSequence::from_commands(cmds);
  const auto result = try_realize(seq, GeomConfig{});
  CHECK(!result.ok());
  CHECK(result.failure->find("EmptySolid") != std::string::npos);
}

TEST_CASE("realize: cyclic rotation of the square loop is voxel-identical") {
  std::vector<CadCommand> rot = {
      CadCommand::sol(),
      CadCommand::line(192, 192),
      CadCommand::line(64, 192),
      CadCommand::line(64, 64),
      CadCommand::line(192, 64),
      default_extrude(),
  };
  const GeomConfig cfg;
  const VoxelGrid a = realize(p1_square_sequence(), 64, cfg);
  const VoxelGrid b = realize(CadSequence::from_commands(rot), 64, cfg);
  CHECK(a == b);
}

TEST_CASE("realize: doubling resolution preserves the emptiness verdict") {
  const GeomConfig cfg;
  for (const CadSequence& seq : {p1_square_sequence(), p3_ring_sequence()}) {
    const VoxelGrid g64 = realize(seq, 64, cfg);
    const VoxelGrid g128 = realize(seq, 128, cfg);
    CHECK(!g64.empty());
    CHECK(!g128.empty());
  }
}

TEST_CASE("voxel: boolean algebra properties on random grids") {
  Rng rng(5);
  for (int rep = 0; rep < 3; ++rep) {
    const VoxelGrid a = random_grid(rng, 8, 0.3);
    const VoxelGrid b = random_grid(rng, 8, 0.3);
    const VoxelGrid c = random_grid(rng, 8, 0.3);
    CHECK(grid_union(a, b) == grid_union(b, a));
    CHECK(grid_union(grid_union(a, b), c) == grid_union(a, grid_union(b, c)));
    CHECK(grid_cut(a, a).count() == 0);
    CHECK(grid_intersect(a, a) == a);
  }
}

TEST_CASE("voxel: json round trip") {
  Rng rng(17);
  const VoxelGrid g = random_grid(rng, 6, 0.4);
  CHECK(voxel_grid_from_json(to_json(g)) == g);
}

TEST_CASE("sample_surface: box face membership, determinism, n=0") {
  const GeomConfig cfg;
  const VoxelGrid grid = realize(p1_square_sequence(), 64, cfg);

  // bounding box of occupied voxels in world units
  double lo[3] = {10, 10, 10}, hi[3] = {-10, -10, -10};
  const double h = grid.pitch();
  for (int x = 0; x < 64; ++x)
    for (int y = 0; y < 64; ++y)
      for (int z = 0; z < 64; ++z) {
        if (!grid.at(x, y, z)) continue;
        const double c[3] = {grid.center(x), grid.center(y), grid.center(z)};
        for (int a = 0; a < 3; ++a) {
          lo[a] = std::min(lo[a], c[a] - h / 2);
          hi[a] = std::max(hi[a], c[a] + h / 2);
        }
      }

  const PointCloud cloud = sample_surface(grid, 2000, 11);
  REQUIRE(cloud.size() == 2000);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double p[3] = {cloud.xs[i], cloud.ys[i], cloud.zs[i]};
    bool near_face = false;
    for (int a = 0; a < 3; ++a) {
      if (std::abs(p[a] - lo[a]) <= h || std::abs(p[a] - hi[a]) <= h) near_face = true;
      CHECK(p[a] >= lo[a] - h);
      CHECK(p[a] <= hi[a] + h);
    }
    CHECK(near_face);
  }

  const PointCloud again = sample_surface(grid, 2000, 11);
  CHECK(again.xs == cloud.xs);
  CHECK(again.ys == cloud.ys);
  CHECK(again.zs == cloud.zs);

  CHECK(sample_surface(grid, 0, 3).size() == 0);
}

TEST_CASE("chamfer: closed forms and brute-force oracle equality") {
  PointCloud p, q;
  p.push_back(0, 0, 0);
  q.push_back(1, 0, 0);
  CHECK(chamfer_distance(p, p) == 0.0);
  CHECK(chamfer_distance(p, q) == 2.0);
  CHECK(chamfer_distance(q, p) == 2.0);

  Rng rng(77);
  for (int rep = 0; rep < 4; ++rep) {
    const PointCloud a = random_cloud(rng, 50);
    const PointCloud b = random_cloud(rng, 37);
    const double fast = chamfer_distance(a, b);
    const double ref = brute_chamfer(a, b);
    CHECK(fast == ref);  // same arithmetic, exact
    CHECK(chamfer_distance(b, a) == fast);
  }
}

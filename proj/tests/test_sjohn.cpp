#include "core/sjohn.hpp"

#include <doctest.h>

#include <cmath>

#include "core/constructions.hpp"
#include "oracles.hpp"

using namespace caplab;

namespace {

DomainSpec square(int scale) {
  DomainSpec s;
  s.dim = 2;
  s.scale = scale;
  const i64 one = pow2i(scale);
  IBox a;
  a.lo = {0, 0, 0};
  a.hi = {one, one, 0};
  s.boxes = {a};
  s.center = {one / 2, one / 2, 0};
  return s;
}

struct Setup {
  VoxelGrid grid;
  DistanceField dist;
  i64 x0 = 0;
};

Setup prepare(const DomainSpec& s, int g) {
  Setup r;
  std::string err;
  REQUIRE_MESSAGE(rasterize(s, g, &r.grid, &err), err);
  const BoundaryGeometry bg = build_boundary(s);
  r.dist = distance_field(r.grid, bg);
  REQUIRE(center_cell(s, r.grid, &r.x0, &err));
  return r;
}

}  // namespace

TEST_CASE("sjohn: feasibility extremes on the unit square") {
  DomainSpec s = square(2);
  Setup st = prepare(s, 4);
  const i64 corner = i64(st.grid.index(0, 0, 0));
  JohnQuery q;
  q.grid = &st.grid;
  q.dist = &st.dist;
  q.x = corner;
  q.x0 = st.x0;
  q.s = 1.0;
  q.C = 1e6;
  std::vector<i64> wit;
  CHECK(john_feasible(q, &wit));
  REQUIRE(wit.size() >= 2);
  CHECK(wit.front() == corner);
  CHECK(wit.back() == st.x0);
  // consecutive witness cells are face neighbors
  for (size_t i = 1; i < wit.size(); ++i) {
    int a[3], b[3];
    st.grid.cell_coords(size_t(wit[i - 1]), &a[0], &a[1], &a[2]);
    st.grid.cell_coords(size_t(wit[i]), &b[0], &b[1], &b[2]);
    CHECK(std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) == 1);
  }
  // path length dominates the straight-line distance
  {
    int a[3], b[3];
    st.grid.cell_coords(size_t(corner), &a[0], &a[1], &a[2]);
    st.grid.cell_coords(size_t(st.x0), &b[0], &b[1], &b[2]);
    const double euclid =
        st.grid.h * std::hypot(double(a[0] - b[0]), double(a[1] - b[1]));
    CHECK(double(wit.size() - 1) * st.grid.h >= euclid - 1e-12);
  }
  q.C = 1e-9;
  CHECK_FALSE(john_feasible(q, nullptr));
}

TEST_CASE("sjohn: point constant basics") {
  DomainSpec s = square(2);
  Setup st = prepare(s, 4);
  std::string err;
  double c = -1.0;
  REQUIRE(john_constant_point(st.grid, st.dist, st.x0, st.x0, 1.0, 0.0, &c,
                              &err));
  CHECK(c == 0.0);
  const i64 corner = i64(st.grid.index(0, 0, 0));
  REQUIRE(john_constant_point(st.grid, st.dist, corner, st.x0, 1.0, 1e-4, &c,
                              &err));
  CHECK(c > 0.0);
  CHECK(c <= 4.0);
}

TEST_CASE("sjohn: convex square has a small constant") {
  DomainSpec s = square(2);
  JohnEstimate est;
  std::string err;
  REQUIRE(john_constant(s, 1.0, 4, 32, &est, &err));
  CHECK(est.C >= 1.5);
  CHECK(est.C <= 4.0);
  CHECK(est.samples > 0);
  CHECK(est.h == std::ldexp(1.0, -4));
}

TEST_CASE("sjohn: s = 2 constant never exceeds s = 1 on short-path domains") {
  // every shortest lattice path in the unit square has length <= 1, where
  // L^2 <= L makes the s = 2 constraint weaker pointwise
  DomainSpec s = square(2);
  JohnEstimate e1, e2;
  std::string err;
  REQUIRE(john_constant(s, 1.0, 4, 32, &e1, &err));
  REQUIRE(john_constant(s, 2.0, 4, 32, &e2, &err));
  CHECK(e2.C <= e1.C * 1.02);
}

TEST_CASE("sjohn: matches the exhaustive oracle on an 8x8 L-shape") {
  DomainSpec s;
  s.dim = 2;
  s.scale = 3;
  IBox a, b;
  a.lo = {0, 0, 0};
  a.hi = {8, 4, 0};
  b.lo = {0, 4, 0};
  b.hi = {4, 8, 0};
  s.boxes = {a, b};
  s.center = {2, 2, 0};
  Setup st = prepare(s, 3);

  oracles::PathGrid og;
  og.nx = st.grid.dims[0];
  og.ny = st.grid.dims[1];
  og.h = st.grid.h;
  og.occ.assign(size_t(og.nx) * og.ny, 0);
  og.dist.assign(size_t(og.nx) * og.ny, 0.0);
  for (int y = 0; y < og.ny; ++y)
    for (int x = 0; x < og.nx; ++x) {
      const size_t i = st.grid.index(x, y, 0);
      og.occ[i] = st.grid.occupied(i) ? 1 : 0;
      og.dist[i] = og.occ[i] ? st.dist.d[i] : 0.0;
    }
  int cx, cy, cz;
  st.grid.cell_coords(size_t(st.x0), &cx, &cy, &cz);
  const struct {
    int x, y;
    double s;
  } cases[] = {{7, 3, 1.0}, {7, 0, 2.0}, {0, 7, 1.0}, {3, 7, 1.5}};
  for (const auto& tc : cases) {
    CAPTURE(tc.x);
    CAPTURE(tc.y);
    CAPTURE(tc.s);
    const i64 x = i64(st.grid.index(tc.x, tc.y, 0));
    REQUIRE(st.grid.occupied(size_t(x)));
    double mine = 0.0;
    std::string err;
    REQUIRE(john_constant_point(st.grid, st.dist, x, st.x0, tc.s, 1e-4, &mine,
                                &err));
    const double ref =
        oracles::brute_min_john_constant(og, tc.x, tc.y, cx, cy, tc.s);
    CHECK(mine == doctest::Approx(ref).epsilon(0.02));
  }
}

TEST_CASE("sjohn: narrow-neck room needs a large 1-John constant but a "
          "bounded 2-John one") {
  RoomsParams p;
  p.n = 2;
  p.s = {2, 0};
  p.a = 2;
  p.J = 2;
  DomainSpec d;
  std::string err;
  REQUIRE(rooms_and_corridors(p, &d, &err));
  Setup st = prepare(d, 10);
  // start at the far corner cell of the deepest room
  const IBox room = d.find_tag("E2")->boxes[0];
  const int lift = 10 - d.scale;
  const int ix = int((room.hi[0] << lift) - 1 - st.grid.origin_units[0]);
  const int iy = int((room.hi[1] << lift) - 1 - st.grid.origin_units[1]);
  const i64 x = i64(st.grid.index(ix, iy, 0));
  REQUIRE(st.grid.occupied(size_t(x)));
  JohnQuery q;
  q.grid = &st.grid;
  q.dist = &st.dist;
  q.x = x;
  q.x0 = st.x0;
  q.s = 2.0;
  q.C = 64.0;
  CHECK(john_feasible(q, nullptr));
  // the corridor is ~2^-8 wide: with s = 1, path length ~2^-4 forces a
  // constant far above 1 there
  q.s = 1.0;
  q.C = 1.0;
  CHECK_FALSE(john_feasible(q, nullptr));
}

TEST_CASE("sjohn: unreachable start reported") {
  DomainSpec s = square(2);
  VoxelGrid g;
  std::string err;
  REQUIRE(rasterize(s, 3, &g, &err));
  // knock out a separating column by hand
  for (int y = 0; y < g.dims[1]; ++y)
    g.set_occupied(g.index(4, y, 0), false);
  const BoundaryGeometry bg = build_boundary(s);
  const DistanceField dist = distance_field(g, bg);
  double c = 0.0;
  CHECK_FALSE(john_constant_point(g, dist, i64(g.index(7, 7, 0)),
                                  i64(g.index(0, 0, 0)), 1.0, 0.0, &c, &err));
  CHECK(err.find("reach") != std::string::npos);
}

// Acceptance harness. Runs the ten declared checks end to end and prints one
// [PASS]/[FAIL] line per criterion; exit status is the number of failures.
// argv[1] = path to the command line binary (used by the determinism check).

#include <cmath>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "core/capacity.hpp"
#include "core/constructions.hpp"
#include "core/content.hpp"
#include "core/harness.hpp"
#include "core/sjohn.hpp"
#include "core/whitney.hpp"
#include "oracles.hpp"

using namespace caplab;

namespace {

int g_failures = 0;

double now() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch())
      .count();
}

void report(int crit, bool ok, const char* f, ...)
    __attribute__((format(printf, 3, 4)));

void report(int crit, bool ok, const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", crit, buf);
  fflush(stdout);
  if (!ok) ++g_failures;
}

// ---------------------------------------------------------------- 1 and 2
// Hand-built corridor: unit length, height 0.1, h = 1/80 (not dyadic), plate
// bands x < 0.05 and x > 0.95. The discrete minimizer is exactly linear in
// the free columns.
Condenser corridor(double p, double delta) {
  Condenser c;
  c.grid.dim = 2;
  c.grid.h = 0.0125;
  c.grid.g = -1;
  c.grid.origin = {0.0, 0.0, 0.0};
  c.grid.dims = {80, 8, 1};
  c.grid.alloc_bits();
  for (size_t i = 0; i < c.grid.ncells(); ++i) c.grid.set_occupied(i);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 80; ++x) {
      const double cx = (x + 0.5) * c.grid.h;
      if (cx < 0.05) c.plateE.push_back(i64(c.grid.index(x, y, 0)));
      if (cx > 0.95) c.plateF.push_back(i64(c.grid.index(x, y, 0)));
    }
  c.p = p;
  c.delta = delta;
  return c;
}

void criterion1() {
  const double t0 = now();
  Condenser c = corridor(2.0, 0.0);
  CapacityResult r;
  std::string err;
  if (!solve_p2(c, 0.0, nullptr, &r, &err)) {
    report(1, false, "corridor solve failed: %s", err.c_str());
    return;
  }
  const double target = 1.0 / 9.0;
  const double rel = std::fabs(r.value - target) / target;
  const double dt = now() - t0;
  report(1, rel <= 0.02 && dt < 10.0,
         "corridor p=2 capacity %.6f vs %.6f (err %.2f%%, %.1fs)", r.value,
         target, 100.0 * rel, dt);
}

// Dyadic-cell strips covering { cells with center within R of (cx,cy) } as
// one box per column, exact integer membership test on doubled coordinates.
void circle_strips(i64 R, i64 cx, i64 cy, bool octant,
                   std::vector<IBox>* out) {
  const i64 xlo = octant ? cx : cx - R - 1;
  for (i64 ix = xlo; ix <= cx + R; ++ix) {
    const i64 dx = 2 * ix + 1 - 2 * cx;
    const i64 rhs = 4 * R * R - dx * dx;
    if (rhs < 1) continue;
    i64 k = i64((std::sqrt(double(rhs)) - 1.0) / 2.0);
    while ((2 * (k + 1) + 1) * (2 * (k + 1) + 1) <= rhs) ++k;
    while (k >= 0 && (2 * k + 1) * (2 * k + 1) > rhs) --k;
    if (k < 0) continue;
    IBox b;
    b.lo = {ix, octant ? cy : cy - k - 1, 0};
    b.hi = {ix + 1, cy + k + 1, 0};
    out->push_back(b);
  }
}

// same per (x, y) column pair in 3-D, octant only
void sphere_strips(i64 R, std::vector<IBox>* out) {
  for (i64 ix = 0; ix <= R; ++ix)
    for (i64 iy = 0; iy <= R; ++iy) {
      const i64 dx = 2 * ix + 1, dy = 2 * iy + 1;
      const i64 rhs = 4 * R * R - dx * dx - dy * dy;
      if (rhs < 1) continue;
      i64 k = i64((std::sqrt(double(rhs)) - 1.0) / 2.0);
      while ((2 * (k + 1) + 1) * (2 * (k + 1) + 1) <= rhs) ++k;
      while (k >= 0 && (2 * k + 1) * (2 * k + 1) > rhs) --k;
      if (k < 0) continue;
      IBox b;
      b.lo = {ix, iy, 0};
      b.hi = {ix + 1, iy + 1, k + 1};
      out->push_back(b);
    }
}

bool radial_check(int n, double p, double* measured, double* expected,
                  std::string* err) {
  const double r1 = 0.125, r2 = 0.375;
  DomainSpec s;
  s.dim = n;
  s.scale = 8;
  IBox box;
  for (int d = 0; d < n; ++d) {
    box.lo[d] = 0;
    box.hi[d] = 256;
    s.center[d] = 128;
  }
  s.boxes = {box};
  WindowJob job;
  if (n == 2) {
    circle_strips(96, 128, 128, false, &job.window);
    circle_strips(32, 128, 128, false, &job.plate0);
  } else {
    sphere_strips(96, &job.window);
    sphere_strips(32, &job.plate0);
  }
  CapacityResult r;
  if (!windowed_capacity(s, job, 8, p, 1e-6, 0.0, nullptr, &r, nullptr, err))
    return false;
  *measured = (n == 3 ? 8.0 : 1.0) * r.value;  // octant by mirror symmetry
  *expected = oracles::radial_capacity(n, p, r1, r2);
  return true;
}

void criterion2() {
  bool ok = true;
  std::string detail;
  char buf[256];
  {
    const double t0 = now();
    Condenser c = corridor(3.0, 1e-6);
    CapacityResult r;
    std::string err;
    if (!solve_p(c, 0.0, nullptr, &r, &err)) {
      report(2, false, "corridor p=3 solve failed: %s", err.c_str());
      return;
    }
    const double target = 0.1 * std::pow(0.9, -2.0);  // W * L^(1-p)
    const double rel = std::fabs(r.value - target) / target;
    const double dt = now() - t0;
    ok = ok && rel <= 0.05 && dt < 120.0;
    snprintf(buf, sizeof buf, "corridor p=3 err %.2f%% (%.1fs)", 100.0 * rel,
             dt);
    detail += buf;
  }
  const struct {
    int n;
    double p;
  } radial[2] = {{2, 1.5}, {3, 3.0}};
  for (const auto& rc : radial) {
    const double t0 = now();
    double meas = 0, expect = 0;
    std::string err;
    if (!radial_check(rc.n, rc.p, &meas, &expect, &err)) {
      report(2, false, "radial n=%d p=%g failed: %s", rc.n, rc.p,
             err.c_str());
      return;
    }
    const double rel = std::fabs(meas - expect) / expect;
    const double dt = now() - t0;
    ok = ok && rel <= 0.05 && dt < 120.0;
    snprintf(buf, sizeof buf, "; radial n=%d p=%g err %.2f%% (%.1fs)", rc.n,
             rc.p, 100.0 * rel, dt);
    detail += buf;
  }
  report(2, ok, "%s", detail.c_str());
}

// ------------------------------------------------------------------- 3
void criterion3() {
  u64 state = 0xc0ffee1234567890ull;
  auto rnd = [&state]() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state;
  };
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    DomainSpec s;
    s.dim = 2;
    s.scale = 4;
    IBox core, arm, e;
    core.lo = {0, 0, 0};
    core.hi = {16, 16, 0};
    const i64 y0 = 2 + 3 * i64(rnd() % 4);
    const i64 w = 2 + i64(rnd() % 3);
    arm.lo = {16, y0, 0};
    arm.hi = {24, y0 + w, 0};
    e.lo = {22, y0, 0};
    e.hi = {24, y0 + w, 0};
    s.boxes = {core, arm};
    s.center = {8, 8, 0};
    s.tags = {{"E", {e}}};
    std::string err;
    WhitneyDecomposition wd;
    if (!whitney_decompose(s, 8, &wd, &err)) {
      report(3, false, "instance %d: %s", k, err.c_str());
      return;
    }
    VoxelGrid g;
    if (!rasterize(s, 6, &g, &err)) {
      report(3, false, "instance %d: %s", k, err.c_str());
      return;
    }
    Condenser c;
    if (!assemble(s, g, "E", wd.cubes[wd.central], 2.0, 0.0, &c, &err)) {
      report(3, false, "instance %d: %s", k, err.c_str());
      return;
    }
    CapacityResult exact, approx;
    if (!solve_p2(c, 0.0, nullptr, &exact, &err)) {
      report(3, false, "instance %d: %s", k, err.c_str());
      return;
    }
    c.delta = 1e-6;
    if (!solve_p(c, 0.0, nullptr, &approx, &err)) {
      report(3, false, "instance %d: %s", k, err.c_str());
      return;
    }
    worst = std::max(worst,
                     std::fabs(approx.value - exact.value) / exact.value);
  }
  report(3, worst < 1e-4,
         "general solver vs linear solver at p=2: worst rel diff %.2e",
         worst);
}

// ---------------------------------------------------------------- 4, 5, 6
void criterion4() {
  const double t0 = now();
  ExperimentReport a, b;
  std::string err;
  const int rca = run_experiment(
      "op sharpness\nfamily rooms\nn 2\ns 2\na 1\np 2\n"
      "jmin 2\njmax 5\nslope_tol 0.2\n",
      &a, &err);
  if (rca == 2) {
    report(4, false, "planar config rejected: %s", err.c_str());
    return;
  }
  const int rcb = run_experiment(
      "op sharpness\nfamily rooms\nn 3\ns 2\na 1\np 2\n"
      "jmin 2\njmax 4\nslope_tol 0.3\n",
      &b, &err);
  if (rcb == 2) {
    report(4, false, "spatial config rejected: %s", err.c_str());
    return;
  }
  const double dt = now() - t0;
  const bool ok = rca == 0 && rcb == 0 && dt < 900.0;
  report(4, ok,
         "capacity decay slopes: n=2 %.3f (target 1, tol 0.2), n=3 %.3f "
         "(target 3, tol 0.3), %.0fs",
         a.slope, b.slope, dt);
}

void criterion5() {
  const double t0 = now();
  ExperimentReport r;
  std::string err;
  const int rc = run_experiment(
      "op counterexample\nfamily tree\nn 2\ns 3\np 2\n"
      "q 1.584962500721156\njmin 1\njmax 4\nslope_tol 0.2\n",
      &r, &err);
  if (rc == 2) {
    report(5, false, "config rejected: %s", err.c_str());
    return;
  }
  const double dt = now() - t0;
  const bool ok = rc == 0 && dt < 900.0;
  report(5, ok,
         "capacity sum decay %.3f (target %.3f, tol 0.2), content spread "
         "%.2f (<= 2), %.0fs",
         r.slope, r.target, r.content_ratio, dt);
}

void criterion6() {
  const double t0 = now();
  ExperimentReport r;
  std::string err;
  const int rc = run_experiment(
      "op lowerbound\nfamily rooms\nn 2\ns 2\na 1\np 2\nq 2\neps 0.1\n"
      "jmin 2\njmax 5\n",
      &r, &err);
  if (rc == 2) {
    report(6, false, "config rejected: %s", err.c_str());
    return;
  }
  const double dt = now() - t0;
  report(6, rc == 0,
         "capacity/content^theta ratios: min %.4g > 0, slope %.3f >= -0.05 "
         "against 1/r, %.0fs",
         r.min_ratio, r.slope, dt);
}

// ------------------------------------------------------------------- 7
DomainSpec simple_domain(int dim, int scale, std::vector<IBox> boxes,
                         Coord center) {
  DomainSpec s;
  s.dim = dim;
  s.scale = scale;
  s.boxes = std::move(boxes);
  s.center = center;
  return s;
}

IBox mk2(i64 x0, i64 y0, i64 x1, i64 y1) {
  IBox b;
  b.lo = {x0, y0, 0};
  b.hi = {x1, y1, 0};
  return b;
}

void criterion7() {
  std::vector<DomainSpec> domains;
  std::string err;
  for (int sc = 1; sc <= 3; ++sc) {
    const i64 one = pow2i(sc);
    domains.push_back(simple_domain(
        2, sc, {mk2(0, 0, one, one)}, {one / 2, one / 2, 0}));
  }
  domains.push_back(simple_domain(2, 3, {mk2(0, 0, 8, 2)}, {4, 1, 0}));
  domains.push_back(simple_domain(2, 3, {mk2(0, 0, 2, 8)}, {1, 4, 0}));
  domains.push_back(
      simple_domain(2, 3, {mk2(0, 0, 8, 4), mk2(0, 4, 4, 8)}, {2, 2, 0}));
  domains.push_back(
      simple_domain(2, 3, {mk2(0, 4, 12, 8), mk2(4, 0, 8, 4)}, {6, 6, 0}));
  domains.push_back(simple_domain(
      2, 3, {mk2(0, 0, 2, 8), mk2(6, 0, 8, 8), mk2(2, 0, 6, 2)}, {1, 1, 0}));
  for (int J = 1; J <= 3; ++J) {
    RoomsParams p;
    p.n = 2;
    p.s = {1, 0};
    p.a = 1;
    p.J = J;
    DomainSpec d;
    if (!rooms_and_corridors(p, &d, &err)) {
      report(7, false, "rooms J=%d: %s", J, err.c_str());
      return;
    }
    domains.push_back(d);
  }
  {
    RoomsParams p;
    p.n = 2;
    p.s = {2, 0};
    p.a = 1;
    p.J = 2;
    DomainSpec d;
    if (!rooms_and_corridors(p, &d, &err)) {
      report(7, false, "%s", err.c_str());
      return;
    }
    domains.push_back(d);
  }
  {
    RoomsParams p;
    p.n = 2;
    p.s = {3, 1};
    p.a = 2;
    p.J = 2;
    DomainSpec d;
    if (!rooms_and_corridors(p, &d, &err)) {
      report(7, false, "%s", err.c_str());
      return;
    }
    domains.push_back(d);
  }
  {
    IBox c;
    c.lo = {0, 0, 0};
    c.hi = {2, 2, 2};
    DomainSpec d;
    d.dim = 3;
    d.scale = 1;
    d.boxes = {c};
    d.center = {1, 1, 1};
    domains.push_back(d);
  }
  {
    RoomsParams p;
    p.n = 3;
    p.s = {1, 0};
    p.a = 1;
    p.J = 2;
    DomainSpec d;
    if (!rooms_and_corridors(p, &d, &err)) {
      report(7, false, "%s", err.c_str());
      return;
    }
    domains.push_back(d);
  }
  for (int J = 1; J <= 2; ++J) {
    TreeParams p;
    p.n = 2;
    p.s = 1;
    p.J = J;
    DomainSpec d;
    if (!branching_tree(p, &d, nullptr, &err)) {
      report(7, false, "tree J=%d: %s", J, err.c_str());
      return;
    }
    domains.push_back(d);
  }
  {
    TreeParams p;
    p.n = 2;
    p.s = 2;
    p.J = 2;
    DomainSpec d;
    if (!branching_tree(p, &d, nullptr, &err)) {
      report(7, false, "%s", err.c_str());
      return;
    }
    domains.push_back(d);
  }
  {
    TreeParams p;
    p.n = 3;
    p.s = 1;
    p.J = 1;
    DomainSpec d;
    if (!branching_tree(p, &d, nullptr, &err)) {
      report(7, false, "%s", err.c_str());
      return;
    }
    domains.push_back(d);
  }
  {
    TreeParams p;
    p.n = 2;
    p.s = 1;
    p.q = 1.0;
    p.J = 2;
    p.mode = TreeMode::kThinned;
    DomainSpec d;
    if (!branching_tree(p, &d, nullptr, &err)) {
      report(7, false, "%s", err.c_str());
      return;
    }
    domains.push_back(d);
  }
  {
    DomainSpec base =
        simple_domain(2, 1, {mk2(0, 0, 2, 2)}, {1, 1, 0});
    WhitneyDecomposition wb;
    if (!whitney_decompose(base, 4, &wb, &err)) {
      report(7, false, "%s", err.c_str());
      return;
    }
    DomainSpec d;
    if (!room_passage_replacement(base, {1, 0}, wb, &d, &err)) {
      report(7, false, "%s", err.c_str());
      return;
    }
    domains.push_back(d);
  }

  size_t violations = 0;
  for (size_t i = 0; i < domains.size(); ++i) {
    WhitneyDecomposition w;
    if (!whitney_decompose(domains[i], -1, &w, &err)) {
      report(7, false, "domain %zu: %s", i, err.c_str());
      return;
    }
    violations += whitney_verify(w, domains[i]).size();
  }
  report(7, violations == 0 && domains.size() >= 20,
         "%zu domains re-verified, %zu violations", domains.size(),
         violations);
}

// ------------------------------------------------------------------- 8
void criterion8() {
  u64 state = 0x9e3779b97f4a7c15ull;
  auto rnd = [&state]() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state;
  };
  auto nested = [](const DyadicCube& a, const DyadicCube& b) {
    const DyadicCube& lo = a.gen <= b.gen ? a : b;
    const DyadicCube& hi = a.gen <= b.gen ? b : a;
    const int sh = hi.gen - lo.gen;
    return (hi.lat[0] >> sh) == lo.lat[0] && (hi.lat[1] >> sh) == lo.lat[1];
  };
  const double qs[4] = {0.7, 1.0, 1.584962500721156, 2.0};
  double worst = 0.0, worst_scale = 0.0;
  int families = 0;
  for (int trial = 0; trial < 150; ++trial) {
    CubeFamily f;
    f.dim = 2;
    const int want = 1 + int(rnd() % 3);
    bool ok = true;
    while (int(f.cubes.size()) < want) {
      DyadicCube c;
      c.gen = int(rnd() % 3);
      const u64 range = u64(4) << c.gen;
      c.lat = {i64(rnd() % range), i64(rnd() % range), 0};
      bool clash = false;
      for (const DyadicCube& o : f.cubes)
        if (nested(o, c)) clash = true;
      if (clash) {
        ok = false;
        break;
      }
      f.cubes.push_back(c);
    }
    if (!ok) continue;
    ++families;
    std::vector<oracles::OracleCube> of;
    for (const DyadicCube& c : f.cubes) of.push_back({c.gen, c.lat});
    CubeFamily half;
    half.dim = 2;
    for (const DyadicCube& c : f.cubes) {
      DyadicCube h = c;
      h.gen += 1;
      half.cubes.push_back(h);
    }
    for (double q : qs) {
      ContentResult mine, shrunk;
      std::string err;
      if (!dyadic_content(f, q, &mine, &err) ||
          !dyadic_content(half, q, &shrunk, &err)) {
        report(8, false, "trial %d: %s", trial, err.c_str());
        return;
      }
      const double ref = oracles::brute_dyadic_content(of, 2, q);
      const double denom = std::max(ref, 1e-300);
      worst = std::max(worst, std::fabs(mine.dyadic_value - ref) / denom);
      worst_scale = std::max(
          worst_scale, std::fabs(shrunk.dyadic_value -
                                 std::exp2(-q) * mine.dyadic_value) /
                           std::max(mine.dyadic_value, 1e-300));
    }
  }
  report(8, families >= 80 && worst <= 1e-12 && worst_scale <= 1e-12,
         "%d families vs exhaustive covers: worst rel diff %.2e, scaling "
         "drift %.2e",
         families, worst, worst_scale);
}

// ------------------------------------------------------------------- 9
bool rooms_john(int J, double s_exp, double* out, std::string* err) {
  RoomsParams p;
  p.n = 2;
  p.s = {2, 0};
  p.a = 1;
  p.J = J;
  DomainSpec d;
  if (!rooms_and_corridors(p, &d, err)) return false;
  JohnEstimate est;
  if (!john_constant(d, s_exp, 2 * J + 2, 24, &est, err)) return false;
  *out = est.C;
  return true;
}

void criterion9() {
  const double t0 = now();
  std::string err;
  double c2_3 = 0, c2_4 = 0;  // s = 2 estimates at J = 3, 4
  double c1[3] = {0, 0, 0};   // s = 1 estimates at J = 2, 3, 4
  if (!rooms_john(3, 2.0, &c2_3, &err) || !rooms_john(4, 2.0, &c2_4, &err) ||
      !rooms_john(2, 1.0, &c1[0], &err) || !rooms_john(3, 1.0, &c1[1], &err) ||
      !rooms_john(4, 1.0, &c1[2], &err)) {
    report(9, false, "john estimate failed: %s", err.c_str());
    return;
  }
  const double drift = std::fabs(c2_4 - c2_3) / c2_3;
  const double g1 = c1[1] / c1[0], g2 = c1[2] / c1[1];

  // independent point check on a tiny grid
  DomainSpec L =
      simple_domain(2, 3, {mk2(0, 0, 8, 4), mk2(0, 4, 4, 8)}, {2, 2, 0});
  VoxelGrid grid;
  if (!rasterize(L, 3, &grid, &err)) {
    report(9, false, "%s", err.c_str());
    return;
  }
  const BoundaryGeometry bg = build_boundary(L);
  const DistanceField dist = distance_field(grid, bg);
  i64 x0 = 0;
  if (!center_cell(L, grid, &x0, &err)) {
    report(9, false, "%s", err.c_str());
    return;
  }
  int cx, cy, cz;
  grid.cell_coords(size_t(x0), &cx, &cy, &cz);
  oracles::PathGrid og;
  og.nx = grid.dims[0];
  og.ny = grid.dims[1];
  og.h = grid.h;
  og.occ.assign(size_t(og.nx) * og.ny, 0);
  og.dist.assign(size_t(og.nx) * og.ny, 0.0);
  for (int y = 0; y < og.ny; ++y)
    for (int x = 0; x < og.nx; ++x) {
      const size_t i = grid.index(x, y, 0);
      og.occ[i] = grid.occupied(i) ? 1 : 0;
      og.dist[i] = og.occ[i] ? dist.d[i] : 0.0;
    }
  double mine = 0.0;
  if (!john_constant_point(grid, dist, i64(grid.index(7, 0, 0)), x0, 1.0,
                           1e-4, &mine, &err)) {
    report(9, false, "%s", err.c_str());
    return;
  }
  const double ref = oracles::brute_min_john_constant(og, 7, 0, cx, cy, 1.0);
  const double point_err = std::fabs(mine - ref) / ref;
  const double dt = now() - t0;

  const bool ok =
      drift <= 0.10 && g1 >= 1.5 && g2 >= 1.5 && point_err <= 0.10;
  report(9, ok,
         "2-John drift J3->J4 %.1f%%, 1-John growth x%.2f x%.2f, point "
         "check err %.2f%%, %.0fs",
         100.0 * drift, g1, g2, 100.0 * point_err, dt);
}

// ------------------------------------------------------------------ 10
bool slurp(const std::string& path, std::string* out) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return false;
  std::ostringstream ss;
  ss << f.rdbuf();
  *out = ss.str();
  return true;
}

void criterion10(const char* cli) {
  if (!cli) {
    report(10, false, "no command line binary given");
    return;
  }
  const char* cfg_path = "acc10.cfg";
  {
    std::ofstream f(cfg_path, std::ios::binary | std::ios::trunc);
    f << "op sharpness\nfamily rooms\nn 2\ns 2\na 1\np 2\n"
         "jmin 2\njmax 4\nslope_tol 0.3\n"
         "csv acc10.csv\nsvg acc10.svg\n";
  }
  std::string csv[2], svg[2], out[2];
  int status[2] = {-1, -1};
  for (int run = 0; run < 2; ++run) {
    char cmd[1024];
    snprintf(cmd, sizeof cmd, "\"%s\" experiment --config %s > acc10.out 2>&1",
             cli, cfg_path);
    const int rc = std::system(cmd);
    status[run] = rc;
    if (!slurp("acc10.csv", &csv[run]) || !slurp("acc10.svg", &svg[run]) ||
        !slurp("acc10.out", &out[run])) {
      report(10, false, "run %d left no outputs (status %d)", run + 1, rc);
      return;
    }
  }
  const bool same = status[0] == status[1] && csv[0] == csv[1] &&
                    svg[0] == svg[1] && out[0] == out[1];
  const bool ran_ok = status[0] == 0;
  std::remove("acc10.cfg");
  std::remove("acc10.csv");
  std::remove("acc10.svg");
  std::remove("acc10.out");
  report(10, same && ran_ok,
         "repeated runs byte-identical: csv %zuB svg %zuB stdout %zuB "
         "(status %d)",
         csv[0].size(), svg[0].size(), out[0].size(), status[0]);
}

}  // namespace

int main(int argc, char** argv) {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10(argc > 1 ? argv[1] : nullptr);
  if (g_failures) printf("%d criterion(s) failed\n", g_failures);
  return g_failures;
}

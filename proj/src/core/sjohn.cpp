#include "sjohn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "boundary.hpp"

namespace caplab {

namespace {

// shared per-grid state so repeated feasibility runs only pay one compare
// per visited cell (the deadline test is done in logs)
struct Search {
  const VoxelGrid* grid = nullptr;
  std::vector<float> logd;  // log d per cell, -inf unoccupied
  std::vector<int32_t> parent;
  std::vector<uint32_t> seen;  // visit stamp per cell
  uint32_t stamp = 0;

  void init(const VoxelGrid& g, const DistanceField& dist) {
    grid = &g;
    const size_t n = g.ncells();
    logd.assign(n, -std::numeric_limits<float>::infinity());
    for (size_t i = 0; i < n; ++i)
      if (g.occupied(i)) logd[i] = float(std::log(dist.d[i]));
    seen.assign(n, 0);
    stamp = 0;
  }

  // BFS in path length; admit cell v at step k iff s*log(k h) <= log C +
  // log d(v); k = 0 is always admissible (L = 0)
  bool feasible(i64 x, i64 x0, double s, double C, std::vector<i64>* wit) {
    const VoxelGrid& g = *grid;
    if (x == x0) {
      if (wit) *wit = {x};
      return true;
    }
    ++stamp;
    if (stamp == 0) {  // wrapped: reset stamps
      std::fill(seen.begin(), seen.end(), 0u);
      stamp = 1;
    }
    const bool track = wit != nullptr;
    if (track) parent.assign(g.ncells(), -1);
    const double logC = std::log(C);
    std::vector<i64> cur, nxt;
    cur.push_back(x);
    seen[size_t(x)] = stamp;
    const i64 stride[3] = {1, i64(g.dims[0]), i64(g.dims[0]) * g.dims[1]};
    for (i64 k = 1; !cur.empty(); ++k) {
      const double lhs = s * std::log(double(k) * g.h) - logC;
      nxt.clear();
      for (i64 c : cur) {
        int iv[3];
        g.cell_coords(size_t(c), &iv[0], &iv[1], &iv[2]);
        for (int d = 0; d < g.dim; ++d)
          for (int sgn = -1; sgn <= 1; sgn += 2) {
            const int j = iv[d] + sgn;
            if (j < 0 || j >= g.dims[d]) continue;
            const i64 o = c + sgn * stride[d];
            if (seen[size_t(o)] == stamp || !g.occupied(size_t(o))) continue;
            if (!(lhs <= double(logd[size_t(o)]))) continue;
            seen[size_t(o)] = stamp;
            if (track) parent[size_t(o)] = int32_t(c);
            if (o == x0) {
              if (track) {
                wit->clear();
                for (i64 v = x0; v != -1; v = parent[size_t(v)]) {
                  wit->push_back(v);
                  if (v == x) break;
                }
                std::reverse(wit->begin(), wit->end());
              }
              return true;
            }
            nxt.push_back(o);
          }
      }
      cur.swap(nxt);
    }
    return false;
  }

  bool reachable(i64 x, i64 x0) {
    return feasible(x, x0, 1.0, 1e300, nullptr);
  }
};

double manhattan_len(const VoxelGrid& g, i64 a, i64 b) {
  int av[3], bv[3];
  g.cell_coords(size_t(a), &av[0], &av[1], &av[2]);
  g.cell_coords(size_t(b), &bv[0], &bv[1], &bv[2]);
  double steps = 0;
  for (int d = 0; d < g.dim; ++d) steps += std::abs(av[d] - bv[d]);
  return steps * g.h;
}

// latest-arrival labels for a fixed constant C: T(v) = the largest step
// count at which a path arriving in v can still reach x0 with every later
// cell u at step j obeying j*h <= (C d(u))^{1/s}.  T(v) = min(D(v),
// max_{u ~ v} T(u) - 1) with D(v) the per-cell deadline; processed in
// descending label order the first relaxation of a cell is final (labels
// pushed from bucket b never exceed b - 1), so an integer bucket queue
// decides feasibility for every start cell in one linear pass.  A feasible
// walk shortcuts to a feasible simple path (earlier arrival keeps every
// suffix deadline), so the label ceiling ncells loses nothing.
struct SlackSweep {
  const VoxelGrid* grid = nullptr;
  double s = 1.0;
  std::vector<double> phi;  // d^(1/s) / h per occupied cell
  i64 cap = 0;              // label ceiling

  void init(const VoxelGrid& g, const DistanceField& dist, double s_) {
    grid = &g;
    s = s_;
    const size_t n = g.ncells();
    cap = i64(n);
    phi.assign(n, 0.0);
    for (size_t i = 0; i < n; ++i)
      if (g.occupied(i)) phi[i] = std::pow(dist.d[i], 1.0 / s) / g.h;
  }

  void run(i64 x0, double C, std::vector<i64>* T) const {
    const VoxelGrid& g = *grid;
    const size_t n = g.ncells();
    const double cf = std::pow(C, 1.0 / s);
    auto deadline = [&](size_t v) -> i64 {
      const double t = cf * phi[v];
      return t >= double(cap) ? cap : i64(t);
    };
    T->assign(n, -1);
    const i64 top = deadline(size_t(x0));
    std::vector<int32_t> head(size_t(top) + 1, -1);
    std::vector<int32_t> nxt(n, -1);
    (*T)[size_t(x0)] = top;
    head[size_t(top)] = int32_t(x0);
    const i64 stride[3] = {1, i64(g.dims[0]), i64(g.dims[0]) * g.dims[1]};
    for (i64 b = top; b >= 1; --b) {
      for (int32_t v = head[size_t(b)]; v != -1; v = nxt[size_t(v)]) {
        if ((*T)[size_t(v)] != b) continue;  // invariant guard; never stale
        int iv[3];
        g.cell_coords(size_t(v), &iv[0], &iv[1], &iv[2]);
        for (int d = 0; d < g.dim; ++d)
          for (int sgn = -1; sgn <= 1; sgn += 2) {
            const int j = iv[d] + sgn;
            if (j < 0 || j >= g.dims[d]) continue;
            const i64 o = i64(v) + sgn * stride[d];
            if (!g.occupied(size_t(o))) continue;
            const i64 cand = std::min(deadline(size_t(o)), b - 1);
            if (cand <= (*T)[size_t(o)]) continue;
            (*T)[size_t(o)] = cand;
            nxt[size_t(o)] = head[size_t(cand)];
            head[size_t(cand)] = int32_t(o);
          }
      }
    }
  }
};

bool point_constant(Search& se, const DistanceField& dist, i64 x, i64 x0,
                    double s, double tol, double lo_seed, double* out,
                    std::string* err) {
  const VoxelGrid& g = *se.grid;
  if (x == x0) {
    *out = 0.0;
    return true;
  }
  if (!se.reachable(x, x0)) {
    *err = "sjohn: start cell cannot reach the center cell";
    return false;
  }
  double dmax = 0.0;
  for (size_t i = 0; i < g.ncells(); ++i)
    if (g.occupied(i)) dmax = std::max(dmax, dist.d[i]);
  double lo = std::pow(manhattan_len(g, x, x0), s) / dmax;
  lo = std::max(lo, lo_seed);
  lo = std::max(lo, 1e-30);
  double hi = lo;
  int grow = 0;
  while (!se.feasible(x, x0, s, hi, nullptr)) {
    hi *= 2.0;
    if (++grow > 300) {
      *err = "sjohn: no feasible constant found (search overflow)";
      return false;
    }
  }
  if (hi == lo) {
    *out = hi;
    return true;
  }
  while (hi > lo * (1.0 + tol)) {
    const double mid = std::sqrt(lo * hi);
    if (se.feasible(x, x0, s, mid, nullptr))
      hi = mid;
    else
      lo = mid;
  }
  *out = hi;
  return true;
}

}  // namespace

bool john_feasible(const JohnQuery& q, std::vector<i64>* witness) {
  Search se;
  se.init(*q.grid, *q.dist);
  return se.feasible(q.x, q.x0, q.s, q.C, witness);
}

bool john_constant_point(const VoxelGrid& grid, const DistanceField& dist,
                         i64 x, i64 x0, double s, double tol, double* out,
                         std::string* err) {
  if (tol <= 0.0) tol = 1e-3;
  if (!grid.occupied(size_t(x)) || !grid.occupied(size_t(x0))) {
    *err = "sjohn: query cells must be occupied";
    return false;
  }
  Search se;
  se.init(grid, dist);
  return point_constant(se, dist, x, x0, s, tol, 0.0, out, err);
}

bool center_cell(const DomainSpec& spec, const VoxelGrid& grid, i64* out,
                 std::string* err) {
  // compare |center_units(cell) - 2^(g+1-scale) * spec.center| exactly
  const int sh = grid.g + 1 - spec.scale;
  Coord target{};
  for (int d = 0; d < spec.dim; ++d) target[d] = spec.center[d] << sh;
  i64 best = -1;
  i128 best_d2 = 0;
  for (size_t idx = 0; idx < grid.ncells(); ++idx) {
    if (!grid.occupied(idx)) continue;
    int iv[3];
    grid.cell_coords(idx, &iv[0], &iv[1], &iv[2]);
    const Coord c = grid.center_units(iv[0], iv[1], iv[2]);
    i128 d2 = 0;
    for (int d = 0; d < spec.dim; ++d) {
      const i128 t = i128(c[d]) - target[d];
      d2 += t * t;
    }
    if (best < 0 || d2 < best_d2) {
      best = i64(idx);
      best_d2 = d2;
    }
  }
  if (best < 0) {
    *err = "sjohn: grid has no occupied cell";
    return false;
  }
  *out = best;
  return true;
}

bool john_constant(const DomainSpec& spec, double s, int g,
                   size_t sample_budget, JohnEstimate* out, std::string* err) {
  VoxelGrid grid;
  if (!rasterize(spec, g, &grid, err)) return false;
  if (!grid_connected(grid)) {
    *err = "sjohn: domain is disconnected at this resolution";
    return false;
  }
  const BoundaryGeometry bg = build_boundary(spec);
  const DistanceField dist = distance_field(grid, bg);
  i64 x0 = -1;
  if (!center_cell(spec, grid, &x0, err)) return false;

  const i64 stride[3] = {1, i64(grid.dims[0]),
                         i64(grid.dims[0]) * grid.dims[1]};
  // sample set 1: one representative per plateau of locally minimal
  // distance inside each tagged set (lowest cell index in the plateau)
  std::vector<i64> samples;
  std::unordered_set<i64> taken;
  auto add = [&](i64 idx) {
    if (taken.insert(idx).second) samples.push_back(idx);
  };
  const int lift = g + 1 - spec.scale;
  std::vector<uint8_t> locmin(grid.ncells(), 0);
  for (size_t idx = 0; idx < grid.ncells(); ++idx) {
    if (!grid.occupied(idx)) continue;
    int iv[3];
    grid.cell_coords(idx, &iv[0], &iv[1], &iv[2]);
    bool ismin = true;
    for (int d = 0; d < grid.dim && ismin; ++d)
      for (int sgn = -1; sgn <= 1 && ismin; sgn += 2) {
        const int j = iv[d] + sgn;
        if (j < 0 || j >= grid.dims[d]) continue;
        const size_t o = idx + size_t(sgn) * size_t(stride[d]);
        if (grid.occupied(o) && dist.d[o] < dist.d[idx]) ismin = false;
      }
    locmin[idx] = ismin;
  }
  for (const TaggedSet& ts : spec.tags) {
    std::vector<IBox> lifted;
    for (const IBox& b : ts.boxes) {
      IBox lb = b;
      for (int d = 0; d < spec.dim; ++d) {
        lb.lo[d] <<= lift;
        lb.hi[d] <<= lift;
      }
      lifted.push_back(lb);
    }
    // every locally minimal cell in the tag joins the sample set — the far
    // end of a wall strip, not its scan-order head, binds the constant
    for (size_t idx = 0; idx < grid.ncells(); ++idx) {
      if (!locmin[idx]) continue;
      int iv[3];
      grid.cell_coords(idx, &iv[0], &iv[1], &iv[2]);
      const Coord c = grid.center_units(iv[0], iv[1], iv[2]);
      for (const IBox& b : lifted) {
        bool inb = true;
        for (int d = 0; d < spec.dim && inb; ++d)
          if (c[d] < b.lo[d] || c[d] > b.hi[d]) inb = false;
        if (inb) {
          add(i64(idx));
          break;
        }
      }
    }
  }
  // sample set 2: stratified lattice sample, first occupied cell per block
  if (sample_budget > 0) {
    double frac = double(grid.ncells()) / double(sample_budget);
    i64 side = i64(std::ceil(std::pow(frac, 1.0 / grid.dim)));
    side = std::max<i64>(side, 1);
    size_t got = 0;
    i64 blocks[3] = {1, 1, 1};
    for (int d = 0; d < grid.dim; ++d)
      blocks[d] = (grid.dims[d] + side - 1) / side;
    for (i64 bz = 0; bz < blocks[2] && got < sample_budget; ++bz)
      for (i64 by = 0; by < blocks[1] && got < sample_budget; ++by)
        for (i64 bx = 0; bx < blocks[0] && got < sample_budget; ++bx) {
          const i64 b0[3] = {bx * side, by * side, bz * side};
          bool found = false;
          for (i64 z = b0[2]; z < std::min<i64>(b0[2] + side, grid.dims[2]) &&
                              !found;
               ++z)
            for (i64 y = b0[1];
                 y < std::min<i64>(b0[1] + side, grid.dims[1]) && !found; ++y)
              for (i64 x = b0[0];
                   x < std::min<i64>(b0[0] + side, grid.dims[0]) && !found;
                   ++x) {
                const size_t idx = grid.index(int(x), int(y), int(z));
                if (grid.occupied(idx)) {
                  add(i64(idx));
                  got++;
                  found = true;
                }
              }
        }
  }

  out->h = grid.h;
  out->samples = 0;
  for (i64 xcell : samples)
    if (xcell != x0) ++out->samples;
  if (out->samples == 0) {
    out->C = 0.0;
    out->argmax_cell = x0;
    return true;
  }

  // bisect C on "every sample is feasible"; one sweep decides all samples,
  // and a start x is feasible iff some neighbor u admits arrival at step 1
  // (the start cell itself carries L = 0 and is never tested)
  SlackSweep sw;
  sw.init(grid, dist, s);
  std::vector<i64> T;
  auto worst_infeasible = [&](double C) -> i64 {
    sw.run(x0, C, &T);
    i64 bad = -1;
    for (i64 xcell : samples) {
      if (xcell == x0) continue;
      int iv[3];
      grid.cell_coords(size_t(xcell), &iv[0], &iv[1], &iv[2]);
      bool ok = false;
      for (int d = 0; d < grid.dim && !ok; ++d)
        for (int sgn = -1; sgn <= 1 && !ok; sgn += 2) {
          const int j = iv[d] + sgn;
          if (j < 0 || j >= grid.dims[d]) continue;
          const i64 o = xcell + sgn * stride[d];
          if (grid.occupied(size_t(o)) && T[size_t(o)] >= 1) ok = true;
        }
      if (!ok && (bad < 0 || xcell < bad)) bad = xcell;
    }
    return bad;
  };
  double dmax = 0.0;
  for (size_t i = 0; i < grid.ncells(); ++i)
    if (grid.occupied(i)) dmax = std::max(dmax, dist.d[i]);
  // lower seed: each sample needs C >= L_straight^s / max d, so their max
  // bounds the group value from below
  double lo = 1e-30;
  i64 hard = -1;
  for (i64 xcell : samples) {
    if (xcell == x0) continue;
    const double b = std::pow(manhattan_len(grid, xcell, x0), s) / dmax;
    if (b > lo) {
      lo = b;
      hard = xcell;
    }
  }
  double hi = lo;
  int grow = 0;
  i64 bad = worst_infeasible(hi);
  while (bad >= 0) {
    hard = bad;
    hi *= 2.0;
    if (++grow > 300) {
      *err = "sjohn: no feasible constant found (search overflow)";
      return false;
    }
    bad = worst_infeasible(hi);
  }
  while (hi > lo * (1.0 + 1e-3)) {
    const double mid = std::sqrt(lo * hi);
    const i64 m = worst_infeasible(mid);
    if (m < 0) {
      hi = mid;
    } else {
      lo = mid;
      hard = m;
    }
  }
  out->C = hi;
  out->argmax_cell = hard;
  return true;
}

}  // namespace caplab

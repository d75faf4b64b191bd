#include "core/whitney.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_set>

namespace caplab {

namespace {

struct CubeKey {
  int gen;
  i64 a, b, c;
  bool operator==(const CubeKey& o) const {
    return gen == o.gen && a == o.a && b == o.b && c == o.c;
  }
};
struct CubeKeyHash {
  size_t operator()(const CubeKey& k) const {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](uint64_t v) {
      h ^= v;
      h *= 1099511628211ull;
    };
    mix(uint64_t(k.gen));
    mix(uint64_t(k.a));
    mix(uint64_t(k.b));
    mix(uint64_t(k.c));
    return size_t(h);
  }
};
CubeKey key_of(const DyadicCube& q) {
  return CubeKey{q.gen, q.lat[0], q.lat[1], q.lat[2]};
}

// squared distance from the closed cube to the boundary, in units 2^-2*qs;
// returns the qs used via *out_qs
i128 cube_bdry_d2(const DyadicCube& q, int dim, const BoundaryGeometry& bg,
                  int* out_qs) {
  const int qs = std::max(q.gen, bg.scale);
  *out_qs = qs;
  return bg.dist2_box_units(cube_box_at_scale(q, dim, qs), qs);
}

}  // namespace

IBox cube_box_at_scale(const DyadicCube& c, int dim, int scale) {
  IBox b;
  const int sh = scale - c.gen;
  for (int d = 0; d < dim; ++d) {
    b.lo[d] = c.lat[d] << sh;
    b.hi[d] = (c.lat[d] + 1) << sh;
  }
  return b;
}

bool whitney_decompose(const DomainSpec& spec, int max_gen,
                       WhitneyDecomposition* out, std::string* err) {
  std::string verr;
  if (!validate_spec(spec, &verr)) {
    *err = "whitney: invalid domain: " + verr;
    return false;
  }
  if (union_volume_units(spec) == 0) {
    *err = "whitney: domain has zero volume";
    return false;
  }
  if (max_gen < 0) max_gen = std::max(spec.scale + 4, 6);
  if (max_gen > kMaxScale - 2) {
    *err = "whitney: max_gen exceeds the coordinate precision budget";
    return false;
  }

  const BoundaryGeometry bg = build_boundary(spec);
  out->dim = spec.dim;
  out->max_gen = max_gen;
  out->cubes.clear();
  out->residual.clear();

  // roots: unit (gen-0) lattice cells covering the bounding box
  Coord blo, bhi;
  spec_bbox(spec, &blo, &bhi);
  Coord rlo{}, rhi{};
  for (int d = 0; d < spec.dim; ++d) {
    rlo[d] = floor_shr(blo[d], spec.scale);
    rhi[d] = floor_shr(bhi[d] - 1, spec.scale) + 1;
  }

  std::vector<DyadicCube> stack;
  Coord it = rlo;
  while (true) {
    DyadicCube root{0, it};
    stack.push_back(root);
    int d = 0;
    for (; d < spec.dim; ++d) {
      if (++it[d] < rhi[d]) break;
      it[d] = rlo[d];
    }
    if (d == spec.dim) break;
  }

  // boxes lifted once per clip scale (cube gen may exceed spec.scale)
  std::vector<std::vector<IBox>> lifted_at(kMaxScale + 1);
  auto boxes_at = [&](int S) -> const std::vector<IBox>& {
    std::vector<IBox>& L = lifted_at[S];
    if (L.empty() && !spec.boxes.empty()) {
      const int sh = S - spec.scale;
      L.reserve(spec.boxes.size());
      for (const IBox& b : spec.boxes) {
        IBox x;
        for (int d = 0; d < spec.dim; ++d) {
          x.lo[d] = b.lo[d] << sh;
          x.hi[d] = b.hi[d] << sh;
        }
        L.push_back(x);
      }
    }
    return L;
  };

  while (!stack.empty()) {
    DyadicCube q = stack.back();
    stack.pop_back();
    // exact volume of (cube ∩ Omega): zero means the open cell misses Omega
    const int S = std::max(spec.scale, q.gen);
    const i128 vol = clipped_volume_units(cube_box_at_scale(q, spec.dim, S),
                                          boxes_at(S), spec.dim);
    if (vol == 0) continue;
    int qs = 0;
    const i128 d2 = cube_bdry_d2(q, spec.dim, bg, &qs);
    const i128 side = i128(1) << (qs - q.gen);
    if (d2 >= i128(spec.dim) * side * side) {
      out->cubes.push_back(q);
      continue;
    }
    if (q.gen >= max_gen) {
      out->residual.push_back(q);
      continue;
    }
    Coord child = q.lat;
    for (int d = 0; d < spec.dim; ++d) child[d] <<= 1;
    for (int m = 0; m < (1 << spec.dim); ++m) {
      DyadicCube ch{q.gen + 1, child};
      for (int d = 0; d < spec.dim; ++d) ch.lat[d] += (m >> d) & 1;
      stack.push_back(ch);
    }
  }
  out->truncated = !out->residual.empty();
  std::sort(out->cubes.begin(), out->cubes.end(), cube_less);
  std::sort(out->residual.begin(), out->residual.end(), cube_less);

  if (out->cubes.empty()) {
    *err = "whitney: no cube qualified before max_gen; deepen max_gen";
    return false;
  }
  if (!whitney_central_cube(*out, spec.center, spec.scale, &out->central)) {
    *err = "whitney: center x0 not covered by any cube; deepen max_gen";
    return false;
  }
  return true;
}

bool whitney_central_cube(const WhitneyDecomposition& w, const Coord& x,
                          int xscale, size_t* idx) {
  bool found = false;
  size_t best = 0;
  // cubes are sorted by (gen, lattice): the first closed-containment hit is
  // already the tie-break winner
  for (size_t i = 0; i < w.cubes.size(); ++i) {
    const DyadicCube& q = w.cubes[i];
    bool in = true;
    for (int d = 0; d < w.dim && in; ++d) {
      if (cmp_scaled(q.lat[d], q.gen, x[d], xscale) > 0 ||
          cmp_scaled(x[d], xscale, q.lat[d] + 1, q.gen) > 0)
        in = false;
    }
    if (in) {
      best = i;
      found = true;
      break;
    }
  }
  if (found) *idx = best;
  return found;
}

std::vector<std::string> whitney_verify(const WhitneyDecomposition& w,
                                        const DomainSpec& spec) {
  std::vector<std::string> bad;
  char buf[256];
  auto cube_str = [&](const DyadicCube& q) {
    char s[128];
    if (w.dim == 3)
      snprintf(s, sizeof s, "gen %d lat (%lld,%lld,%lld)", q.gen,
               (long long)q.lat[0], (long long)q.lat[1], (long long)q.lat[2]);
    else
      snprintf(s, sizeof s, "gen %d lat (%lld,%lld)", q.gen,
               (long long)q.lat[0], (long long)q.lat[1]);
    return std::string(s);
  };

  // disjoint interiors: dyadic cubes overlap iff one is an ancestor-or-self
  // of the other, so it suffices to look the ancestor chain up in a set
  std::unordered_set<CubeKey, CubeKeyHash> seen;
  int min_gen = kMaxScale;
  for (const DyadicCube& q : w.cubes) min_gen = std::min(min_gen, q.gen);
  for (const DyadicCube& q : w.cubes) {
    if (!seen.insert(key_of(q)).second) {
      bad.push_back("duplicate cube: " + cube_str(q));
    }
  }
  for (const DyadicCube& q : w.cubes) {
    DyadicCube a = q;
    while (a.gen > min_gen) {
      --a.gen;
      for (int d = 0; d < w.dim; ++d) a.lat[d] = floor_shr(a.lat[d], 1);
      if (seen.count(key_of(a))) {
        bad.push_back("overlapping cubes: " + cube_str(q) + " inside " +
                      cube_str(a));
        break;
      }
    }
  }

  // sandwich, and containment of each cube in Omega (positive clip volume
  // plus positive boundary distance pins the cube inside)
  const BoundaryGeometry bg = build_boundary(spec);
  for (const DyadicCube& q : w.cubes) {
    int qs = 0;
    const i128 d2 = cube_bdry_d2(q, w.dim, bg, &qs);
    const i128 s2 = (i128(1) << (qs - q.gen)) * (i128(1) << (qs - q.gen));
    if (d2 < i128(w.dim) * s2)
      bad.push_back("sandwich lower bound fails: " + cube_str(q));
    if (d2 > i128(16) * i128(w.dim) * s2)
      bad.push_back("sandwich upper bound fails: " + cube_str(q));
  }

  // exact volume identity at a common scale
  {
    int S = std::max(spec.scale, w.max_gen);
    for (const DyadicCube& q : w.cubes) S = std::max(S, q.gen);
    bool overflow = false;
    Coord blo, bhi;
    spec_bbox(spec, &blo, &bhi);
    i64 ext = 1;
    for (int d = 0; d < spec.dim; ++d)
      ext = std::max(ext, (bhi[d] - blo[d]) >> spec.scale);
    // total volume in units 2^-(dim*S) must stay inside i128
    int bits = spec.dim * S;
    i64 e = ext;
    while (e > 0) {
      ++bits;
      e >>= 1;
    }
    if (bits > 120) overflow = true;
    if (overflow) {
      bad.push_back("volume identity skipped: common scale too deep");
    } else {
      i128 total = 0;
      for (const DyadicCube& q : w.cubes) {
        i128 side = i128(1) << (S - q.gen);
        i128 v = side;
        for (int d = 1; d < spec.dim; ++d) v *= side;
        total += v;
      }
      const DomainSpec lifted = rescale_spec(spec, S);
      for (const DyadicCube& q : w.residual) {
        total += clipped_volume_units(cube_box_at_scale(q, spec.dim, S),
                                      lifted.boxes, spec.dim);
      }
      i128 want = union_volume_units(lifted);
      if (total != want) {
        snprintf(buf, sizeof buf,
                 "volume identity fails: cubes+residual != domain at scale %d",
                 S);
        bad.push_back(buf);
      }
    }
  }

  // x0 in the central cube
  if (w.central >= w.cubes.size()) {
    bad.push_back("central index out of range");
  } else {
    const DyadicCube& q = w.cubes[w.central];
    for (int d = 0; d < spec.dim; ++d) {
      if (cmp_scaled(q.lat[d], q.gen, spec.center[d], spec.scale) > 0 ||
          cmp_scaled(spec.center[d], spec.scale, q.lat[d] + 1, q.gen) > 0) {
        bad.push_back("x0 not inside the central cube");
        break;
      }
    }
  }
  return bad;
}

int whitney_max_neighbor_gap(const WhitneyDecomposition& w) {
  std::unordered_set<CubeKey, CubeKeyHash> seen;
  for (const DyadicCube& q : w.cubes) seen.insert(key_of(q));
  std::vector<int> gens;
  {
    std::unordered_set<int> gs;
    for (const DyadicCube& q : w.cubes) gs.insert(q.gen);
    gens.assign(gs.begin(), gs.end());
    std::sort(gens.begin(), gens.end());
  }
  int worst = 0;
  // For each cube and each finer generation present, walk the shell of
  // lattice positions whose closed cells touch the cube's closure (interior
  // positions cannot hold disjoint cubes). Coarser pairs are reached from
  // the finer cube of the pair, so scanning g2 >= gen covers everything.
  for (const DyadicCube& q : w.cubes) {
    for (int g2 : gens) {
      if (g2 < q.gen) continue;
      const int sh = g2 - q.gen;
      Coord lo, hi;
      for (int d = 0; d < w.dim; ++d) {
        lo[d] = (q.lat[d] << sh) - 1;
        hi[d] = ((q.lat[d] + 1) << sh) + 1;  // exclusive
      }
      Coord it = lo;
      while (true) {
        bool on_shell = false;
        for (int d = 0; d < w.dim; ++d)
          if (it[d] == lo[d] || it[d] == hi[d] - 1) on_shell = true;
        if (on_shell) {
          DyadicCube t{g2, {0, 0, 0}};
          for (int d = 0; d < w.dim; ++d) t.lat[d] = it[d];
          if (!(g2 == q.gen && t.lat == q.lat) && seen.count(key_of(t)))
            worst = std::max(worst, g2 - q.gen);
        }
        int d = 0;
        for (; d < w.dim; ++d) {
          // jump across the interior block on the lowest axis
          if (d == 0 && w.dim > 1 && it[0] == lo[0] && hi[0] - 1 > lo[0] + 1) {
            bool outer = false;
            for (int e = 1; e < w.dim; ++e)
              if (it[e] == lo[e] || it[e] == hi[e] - 1) outer = true;
            if (!outer) {
              it[0] = hi[0] - 1;
              break;
            }
          }
          if (++it[d] < hi[d]) break;
          it[d] = lo[d];
        }
        if (d == w.dim) break;
      }
    }
  }
  return worst;
}

std::string emit_whitney(const WhitneyDecomposition& w) {
  std::string s;
  char buf[160];
  snprintf(buf, sizeof buf, "caplab-whitney v1\ndim %d\nmaxgen %d\n", w.dim,
           w.max_gen);
  s += buf;
  for (size_t i = 0; i < w.cubes.size(); ++i) {
    const DyadicCube& q = w.cubes[i];
    if (w.dim == 3)
      snprintf(buf, sizeof buf, "cube %d %lld %lld %lld%s\n", q.gen,
               (long long)q.lat[0], (long long)q.lat[1], (long long)q.lat[2],
               i == w.central ? " central" : "");
    else
      snprintf(buf, sizeof buf, "cube %d %lld %lld%s\n", q.gen,
               (long long)q.lat[0], (long long)q.lat[1],
               i == w.central ? " central" : "");
    s += buf;
  }
  for (const DyadicCube& q : w.residual) {
    if (w.dim == 3)
      snprintf(buf, sizeof buf, "residual %d %lld %lld %lld\n", q.gen,
               (long long)q.lat[0], (long long)q.lat[1], (long long)q.lat[2]);
    else
      snprintf(buf, sizeof buf, "residual %d %lld %lld\n", q.gen,
               (long long)q.lat[0], (long long)q.lat[1]);
    s += buf;
  }
  return s;
}

}  // namespace caplab

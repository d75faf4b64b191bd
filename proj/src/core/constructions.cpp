#include "core/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numeric>

namespace caplab {

namespace {

std::string fmt(const char* f, ...) {
  char buf[256];
  va_list ap;
  va_start(ap, f);
  vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

IBox make_box(int dim, const Coord& a, const Coord& b) {
  IBox x;
  for (int d = 0; d < dim; ++d) {
    x.lo[d] = std::min(a[d], b[d]);
    x.hi[d] = std::max(a[d], b[d]);
  }
  return x;
}

// Sweep over axis 0 intervals; near-linear for scattered boxes. Reports the
// first interior overlap, and (when intended != null) any positive-area face
// contact not listed in `intended` (pairs of indices, unordered).
bool certify_contacts(const std::vector<IBox>& boxes, int dim,
                      const std::vector<std::pair<int, int>>* intended,
                      std::string* bad) {
  std::vector<int> idx(boxes.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return boxes[a].lo[0] < boxes[b].lo[0]; });
  auto is_intended = [&](int a, int b) {
    if (!intended) return false;
    if (a > b) std::swap(a, b);
    for (const auto& pr : *intended)
      if (pr.first == a && pr.second == b) return true;
    return false;
  };
  for (size_t i = 0; i < idx.size(); ++i) {
    const IBox& A = boxes[idx[i]];
    for (size_t j = i + 1; j < idx.size(); ++j) {
      const IBox& B = boxes[idx[j]];
      if (B.lo[0] > A.hi[0]) break;
      if (boxes_interior_overlap(A, B, dim)) {
        *bad = fmt("boxes %d and %d have overlapping interiors", idx[i],
                   idx[j]);
        return false;
      }
      if (intended && boxes_union_connected(A, B, dim) &&
          !is_intended(idx[i], idx[j])) {
        *bad = fmt("unexpected face contact between boxes %d and %d", idx[i],
                   idx[j]);
        return false;
      }
    }
  }
  return true;
}

}  // namespace

bool rooms_and_corridors(const RoomsParams& p, DomainSpec* out,
                         std::string* err) {
  if (p.n != 2 && p.n != 3) {
    *err = "rooms: n must be 2 or 3";
    return false;
  }
  if (p.a < 1 || p.J < 1) {
    *err = "rooms: need a >= 1 and J >= 1";
    return false;
  }
  Dyadic s = p.s;
  s.normalize();
  if (cmp_scaled(s.num, s.scale, 1, 0) < 0) {
    *err = "rooms: need s >= 1";
    return false;
  }
  if (s.scale > 0 && ((i64(p.a) * s.num) & ((i64(1) << s.scale) - 1)) != 0) {
    *err = "rooms: a*s must be an integer so corridor widths stay dyadic";
    return false;
  }
  const i64 as = (i64(p.a) * s.num) >> s.scale;  // width exponent per step

  // precision needed by rooms (a*J), corridor half-width (a*s*J + 1)
  const i64 need = std::max<i64>(i64(p.a) * p.J, as * p.J + 1);
  if (need > kMaxScale - 2) {
    const int jmax = int(std::min<i64>((kMaxScale - 3) / p.a,
                                       (kMaxScale - 3) / as));
    *err = fmt("rooms: precision budget exceeded; maximal feasible J = %d",
               jmax);
    return false;
  }

  // Packing along the top face. Canonical rule: leading gap r_1, then gap
  // max(r_j, r_{j+1}) = r_j between rooms. If that overflows the face, fall
  // back to a uniform dyadic gap 2^-t with t minimal.
  int m = int(std::max<i64>(need, p.a * i64(p.J)));
  auto r_units = [&](int j, int scale) { return i64(1) << (scale - p.a * j); };
  std::vector<i64> X(p.J + 1, 0);  // room left edges, filled at scale m
  {
    bool fits = true;
    i64 x = r_units(1, m);
    for (int j = 1; j <= p.J; ++j) {
      X[j] = x;
      x += 2 * r_units(j, m);
    }
    if (X[p.J] + r_units(p.J, m) > (i64(1) << m)) fits = false;
    if (!fits) {
      int t = 1;
      for (; t <= kMaxScale - 2; ++t) {
        // feasibility of sum r_j + J*2^-t <= 1, tested at a scale coarse
        // enough to hold every term exactly
        const int T = std::max(t, int(p.a) * p.J);
        i128 sum = 0;
        for (int j = 1; j <= p.J; ++j) sum += i128(1) << (T - int(p.a) * j);
        if (sum + (i128(p.J) << (T - t)) <= (i128(1) << T)) break;
      }
      if (t > kMaxScale - 2) {
        *err = fmt("rooms: J = %d does not fit on the face; maximal feasible "
                   "J is smaller",
                   p.J);
        return false;
      }
      if (t > m) m = t;
      i64 x2 = 0;
      for (int j = 1; j <= p.J; ++j) {
        x2 += i64(1) << (m - t);  // gap 2^-t
        X[j] = x2;
        x2 += r_units(j, m);
      }
    }
  }

  out->dim = p.n;
  out->scale = m;
  out->boxes.clear();
  out->tags.clear();
  const i64 one = i64(1) << m;
  const int up = p.n - 1;  // top-face axis
  {
    IBox core;
    for (int d = 0; d < p.n; ++d) {
      core.lo[d] = 0;
      core.hi[d] = one;
    }
    out->boxes.push_back(core);
  }
  for (int d = 0; d < kMaxDim; ++d) out->center[d] = 0;
  for (int d = 0; d < p.n; ++d) out->center[d] = one / 2;

  std::vector<std::pair<int, int>> intended;
  for (int j = 1; j <= p.J; ++j) {
    const i64 r = r_units(j, m);
    const i64 w2 = i64(1) << (m - as * j - 1);  // half corridor width
    const i64 cx = X[j] + r / 2;
    IBox corr, room;
    corr.lo[0] = cx - w2;
    corr.hi[0] = cx + w2;
    room.lo[0] = X[j];
    room.hi[0] = X[j] + r;
    if (p.n == 3) {
      corr.lo[1] = one / 2 - w2;
      corr.hi[1] = one / 2 + w2;
      room.lo[1] = one / 2 - r / 2;
      room.hi[1] = one / 2 + r / 2;
    }
    corr.lo[up] = one;
    corr.hi[up] = one + r;
    room.lo[up] = one + r;
    room.hi[up] = one + 2 * r;
    const int ci = int(out->boxes.size());
    out->boxes.push_back(corr);
    out->boxes.push_back(room);
    intended.push_back({0, ci});       // core <-> corridor
    intended.push_back({ci, ci + 1});  // corridor <-> room
    out->tags.push_back({fmt("E%d", j), {room}});
    out->tags.push_back({fmt("C%d", j), {corr}});
  }

  std::string bad;
  if (!certify_contacts(out->boxes, p.n, &intended, &bad)) {
    *err = "rooms: geometry certificate failed: " + bad;
    return false;
  }
  if (!validate_spec(*out, err)) {
    *err = "rooms: " + *err;
    return false;
  }
  return true;
}

bool branching_tree(const TreeParams& p, DomainSpec* out, TreeStructure* st,
                    std::string* err) {
  if (p.n != 2 && p.n != 3) {
    *err = "tree: n must be 2 or 3";
    return false;
  }
  if (p.s < 1 || p.J < 1) {
    *err = "tree: need integral s >= 1 and J >= 1";
    return false;
  }
  const i64 need = i64(p.J) * p.s + 2;
  if (need > kMaxScale - 2) {
    *err = "tree: precision budget exceeded; lower J or s";
    return false;
  }
  const int m = int(need);
  const i64 one = i64(1) << m;

  out->dim = p.n;
  out->scale = m;
  out->boxes.clear();
  out->tags.clear();
  IBox unit;
  for (int d = 0; d < p.n; ++d) {
    unit.lo[d] = 0;
    unit.hi[d] = one;
  }
  out->boxes.push_back(unit);
  for (int d = 0; d < kMaxDim; ++d) out->center[d] = 0;
  for (int d = 0; d < p.n; ++d) out->center[d] = one / 2;

  TreeStructure local;
  TreeStructure& tree = st ? *st : local;
  tree.legs.clear();

  // attachment slots: (corner, outward orthant, parent leg index)
  struct Slot {
    Coord corner{};
    std::array<int, 3> sigma{0, 0, 0};
    int parent = -1;
    int parent_box = 0;  // index into out->boxes of the box the passage meets
  };
  std::vector<Slot> slots;
  for (int c = 0; c < (1 << p.n); ++c) {
    Slot sl;
    for (int d = 0; d < p.n; ++d) {
      sl.corner[d] = ((c >> d) & 1) ? one : 0;
      sl.sigma[d] = ((c >> d) & 1) ? 1 : -1;
    }
    slots.push_back(sl);
  }
  // lex order of corner coordinates, for deterministic thinning
  auto slot_less = [&](const Slot& a, const Slot& b) {
    if (a.parent != b.parent) return a.parent < b.parent;
    return a.corner < b.corner;
  };
  std::sort(slots.begin(), slots.end(), slot_less);

  std::vector<std::pair<int, int>> intended;
  for (int j = 1; j <= p.J; ++j) {
    size_t nslots = slots.size();
    if (p.mode == TreeMode::kThinned) {
      const double kk = std::ceil(std::exp2(p.q * j));
      if (kk > double(nslots)) {
        *err = fmt("tree: thinned mode needs %.0f legs at step %d but only "
                   "%zu attachment slots exist",
                   kk, j, nslots);
        return false;
      }
      nslots = size_t(kk);
    }
    const i64 ell = i64(1) << (m - j);
    const i64 w2 = i64(1) << (m - i64(j) * p.s - 2);
    std::vector<Slot> next;
    for (size_t si = 0; si < nslots; ++si) {
      const Slot& sl = slots[si];
      Coord pa = sl.corner, pb = sl.corner;
      pb[0] += sl.sigma[0] * ell;
      for (int d = 1; d < p.n; ++d) {
        pa[d] -= w2;
        pb[d] += w2;
      }
      const IBox pass = make_box(p.n, pa, pb);
      Coord ra = sl.corner, rb = sl.corner;
      ra[0] += sl.sigma[0] * ell;
      rb[0] += sl.sigma[0] * 2 * ell;
      for (int d = 1; d < p.n; ++d) rb[d] += sl.sigma[d] * ell;
      const IBox room = make_box(p.n, ra, rb);

      const int pi = int(out->boxes.size());
      out->boxes.push_back(pass);
      out->boxes.push_back(room);
      intended.push_back({std::min(sl.parent_box, pi),
                          std::max(sl.parent_box, pi)});
      intended.push_back({pi, pi + 1});
      TreeLeg leg;
      leg.step = j;
      leg.parent = sl.parent;
      leg.passage = pass;
      leg.room = room;
      leg.sigma = sl.sigma;
      const int leg_idx = int(tree.legs.size());
      tree.legs.push_back(leg);

      // free corners of the new room: all but the one the passage meets
      Coord incoming{};
      incoming[0] = sl.sigma[0] > 0 ? room.lo[0] : room.hi[0];
      for (int d = 1; d < p.n; ++d)
        incoming[d] = sl.sigma[d] > 0 ? room.lo[d] : room.hi[d];
      for (int c = 0; c < (1 << p.n); ++c) {
        Slot ns;
        for (int d = 0; d < p.n; ++d) {
          ns.corner[d] = ((c >> d) & 1) ? room.hi[d] : room.lo[d];
          ns.sigma[d] =
              (2 * ns.corner[d] > room.lo[d] + room.hi[d]) ? 1 : -1;
        }
        if (ns.corner == incoming) continue;
        ns.parent = leg_idx;
        ns.parent_box = pi + 1;
        next.push_back(ns);
      }
    }
    // collect step-j tags
    std::vector<IBox> rooms, passes;
    for (const TreeLeg& L : tree.legs)
      if (L.step == j) {
        rooms.push_back(L.room);
        passes.push_back(L.passage);
      }
    out->tags.push_back({fmt("E%d", j), rooms});
    out->tags.push_back({fmt("C%d", j), passes});

    std::sort(next.begin(), next.end(), slot_less);
    slots = std::move(next);
  }

  std::string bad;
  if (!certify_contacts(out->boxes, p.n, &intended, &bad)) {
    *err = "tree: geometry certificate failed: " + bad;
    return false;
  }
  if (!validate_spec(*out, err)) {
    *err = "tree: " + *err;
    return false;
  }
  return true;
}

bool room_passage_replacement(const DomainSpec& base, const Dyadic& s_in,
                              const WhitneyDecomposition& w, DomainSpec* out,
                              std::string* err) {
  Dyadic s = s_in;
  s.normalize();
  if (cmp_scaled(s.num, s.scale, 1, 0) < 0) {
    *err = "replacement: need s >= 1";
    return false;
  }
  // per-cube passage width exponent (k+2)*s must be integral and in budget
  i64 max_exp = 0, max_k = 0;
  for (const DyadicCube& q : w.cubes) max_k = std::max<i64>(max_k, q.gen);
  for (size_t i = 0; i < w.cubes.size(); ++i) {
    if (i == w.central) continue;
    const i64 k = w.cubes[i].gen;
    const i64 num = (k + 2) * s.num;
    if (s.scale > 0 && (num & ((i64(1) << s.scale) - 1)) != 0) {
      *err = fmt("replacement: (k+2)*s is not an integer for cube generation "
                 "%lld",
                 (long long)k);
      return false;
    }
    max_exp = std::max(max_exp, num >> s.scale);
  }
  if (max_exp + 1 > kMaxScale - 1 || max_k + 3 > kMaxScale - 1) {
    // smallest generation whose passage width would still be representable
    i64 kmin = ((kMaxScale - 2) << s.scale) / s.num - 2;
    *err = fmt("replacement: passage width below precision budget; deepest "
               "representable generation is %lld",
               (long long)kmin);
    return false;
  }

  const int M = int(std::max<i64>({i64(base.scale), max_exp + 1, max_k + 3}));
  out->dim = base.dim;
  out->scale = M;
  out->boxes.clear();
  out->tags.clear();
  out->center = base.center;
  for (int d = 0; d < base.dim; ++d)
    out->center[d] <<= (M - base.scale);

  auto tag_push = [&](const std::string& name, const IBox& b) {
    for (TaggedSet& t : out->tags)
      if (t.name == name) {
        t.boxes.push_back(b);
        return;
      }
    out->tags.push_back({name, {b}});
  };

  for (size_t i = 0; i < w.cubes.size(); ++i) {
    const DyadicCube& q = w.cubes[i];
    const IBox Q = cube_box_at_scale(q, base.dim, M);
    if (i == w.central) {
      out->boxes.push_back(Q);
      continue;
    }
    const i64 r = i64(1) << (M - q.gen - 2);          // room edge
    const i64 wexp = ((q.gen + 2) * s.num) >> s.scale;
    const i64 w2 = i64(1) << (M - wexp - 1);          // half passage width
    // shell: cube minus the open inner box [r/2, 7r/2]^n (local coords)
    Coord ilo, ihi;
    for (int d = 0; d < base.dim; ++d) {
      ilo[d] = Q.lo[d] + r / 2;
      ihi[d] = Q.hi[d] - r / 2;
    }
    // onion peel: per axis, a lower and an upper slab; earlier axes clamped
    // to the inner range, later axes spanning the full cube
    for (int d = 0; d < base.dim; ++d) {
      IBox lo_slab, hi_slab;
      for (int e = 0; e < base.dim; ++e) {
        if (e < d) {
          lo_slab.lo[e] = hi_slab.lo[e] = ilo[e];
          lo_slab.hi[e] = hi_slab.hi[e] = ihi[e];
        } else if (e > d) {
          lo_slab.lo[e] = hi_slab.lo[e] = Q.lo[e];
          lo_slab.hi[e] = hi_slab.hi[e] = Q.hi[e];
        }
      }
      lo_slab.lo[d] = Q.lo[d];
      lo_slab.hi[d] = ilo[d];
      hi_slab.lo[d] = ihi[d];
      hi_slab.hi[d] = Q.hi[d];
      out->boxes.push_back(lo_slab);
      out->boxes.push_back(hi_slab);
    }
    IBox room, pass;
    for (int d = 0; d < base.dim; ++d) {
      room.lo[d] = Q.lo[d] + 3 * (r / 2);
      room.hi[d] = Q.lo[d] + 5 * (r / 2);
      if (d > 0) {
        pass.lo[d] = Q.lo[d] + 2 * r - w2;
        pass.hi[d] = Q.lo[d] + 2 * r + w2;
      }
    }
    pass.lo[0] = Q.lo[0] + r / 2;
    pass.hi[0] = Q.lo[0] + 3 * (r / 2);
    out->boxes.push_back(pass);
    out->boxes.push_back(room);
    tag_push(fmt("E%d", q.gen + 2), room);
    tag_push(fmt("C%d", q.gen + 2), pass);
  }

  // keep truncation residue: those cells, clipped to the base union, stay
  // uncarved so the carved domain still exhausts the base domain
  const DomainSpec lifted = rescale_spec(base, M);
  for (const DyadicCube& q : w.residual) {
    const IBox cell = cube_box_at_scale(q, base.dim, M);
    for (const IBox& b : lifted.boxes) {
      IBox x;
      bool empty = false;
      for (int d = 0; d < base.dim; ++d) {
        x.lo[d] = std::max(cell.lo[d], b.lo[d]);
        x.hi[d] = std::min(cell.hi[d], b.hi[d]);
        if (x.lo[d] >= x.hi[d]) empty = true;
      }
      if (!empty) out->boxes.push_back(x);
    }
  }

  if (!validate_spec(*out, err)) {
    *err = "replacement: " + *err;
    return false;
  }
  return true;
}

}  // namespace caplab

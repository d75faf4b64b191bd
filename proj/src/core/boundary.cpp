#include "core/boundary.hpp"

#include <algorithm>
#include <cmath>

namespace caplab {

namespace {

// Candidate filter: boxes whose closure meets the closed face rectangle.
bool closed_meets(const IBox& b, const IBox& face, int dim) {
  for (int d = 0; d < dim; ++d)
    if (b.hi[d] < face.lo[d] || b.lo[d] > face.hi[d]) return false;
  return true;
}

// Orthant-probe interiority of a point given at twice the box scale.
// Candidates must include every box whose closure contains the point.
bool interior_at(const std::vector<const IBox*>& cand, int dim,
                 const Coord& x2 /* doubled coordinates */) {
  const int npat = 1 << dim;
  for (int pat = 0; pat < npat; ++pat) {
    bool covered = false;
    for (const IBox* b : cand) {
      bool ok = true;
      for (int d = 0; d < dim && ok; ++d) {
        const i64 lo2 = b->lo[d] << 1, hi2 = b->hi[d] << 1;
        if ((pat >> d) & 1)
          ok = lo2 <= x2[d] && x2[d] < hi2;
        else
          ok = lo2 < x2[d] && x2[d] <= hi2;
      }
      if (ok) { covered = true; break; }
    }
    if (!covered) return false;
  }
  return true;
}

struct TreeBuilder {
  const std::vector<IBox>& cells;
  int dim;
  std::vector<BoundaryGeometry::Node>& nodes;
  std::vector<int>& order;

  int build(int begin, int end) {
    BoundaryGeometry::Node nd;
    nd.lo = cells[order[begin]].lo;
    nd.hi = cells[order[begin]].hi;
    for (int i = begin; i < end; ++i) {
      const IBox& c = cells[order[i]];
      for (int d = 0; d < dim; ++d) {
        nd.lo[d] = std::min(nd.lo[d], c.lo[d]);
        nd.hi[d] = std::max(nd.hi[d], c.hi[d]);
      }
    }
    const int idx = int(nodes.size());
    nodes.push_back(nd);
    if (end - begin <= 8) {
      nodes[idx].begin = begin;
      nodes[idx].end = end;
      return idx;
    }
    int axis = 0;
    i64 best = -1;
    for (int d = 0; d < dim; ++d) {
      const i64 ext = nd.hi[d] - nd.lo[d];
      if (ext > best) { best = ext; axis = d; }
    }
    const int mid = (begin + end) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid,
                     order.begin() + end, [&](int a, int b) {
                       const i64 ca = cells[a].lo[axis] + cells[a].hi[axis];
                       const i64 cb = cells[b].lo[axis] + cells[b].hi[axis];
                       return ca != cb ? ca < cb : a < b;
                     });
    const int l = build(begin, mid);
    const int r = build(mid, end);
    nodes[idx].left = l;
    nodes[idx].right = r;
    nodes[idx].begin = nodes[idx].end = 0;
    return idx;
  }
};

// Squared distance between a box and a query box, each lifted to the common
// scale by its own shift.
inline i128 d2_boxes(const Coord& lo, const Coord& hi, const Coord& qlo,
                     const Coord& qhi, int dim, int blift, int qlift) {
  i128 d2 = 0;
  for (int d = 0; d < dim; ++d) {
    const i64 blo = lo[d] << blift, bhi = hi[d] << blift;
    const i64 ql = qlo[d] << qlift, qh = qhi[d] << qlift;
    i64 gap = 0;
    if (blo > qh) gap = blo - qh;
    else if (ql > bhi) gap = ql - bhi;
    d2 += i128(gap) * gap;
  }
  return d2;
}

}  // namespace

i128 BoundaryGeometry::dist2_box_units(const IBox& q, int qscale) const {
  int blift = qscale - scale, qlift = 0;
  if (blift < 0) {
    qlift = -blift;
    blift = 0;
  }
  i128 best = -1;
  if (nodes.empty()) return best;
  // DFS with pruning; visit nearer child first.
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& nd = nodes[stack[--top]];
    const i128 bound = d2_boxes(nd.lo, nd.hi, q.lo, q.hi, dim, blift, qlift);
    if (best >= 0 && bound >= best) continue;
    if (nd.left < 0) {
      for (int i = nd.begin; i < nd.end; ++i) {
        const IBox& c = cells[order[i]];
        const i128 d2 = d2_boxes(c.lo, c.hi, q.lo, q.hi, dim, blift, qlift);
        if (best < 0 || d2 < best) best = d2;
      }
    } else {
      const i128 dl = d2_boxes(nodes[nd.left].lo, nodes[nd.left].hi, q.lo,
                               q.hi, dim, blift, qlift);
      const i128 dr = d2_boxes(nodes[nd.right].lo, nodes[nd.right].hi, q.lo,
                               q.hi, dim, blift, qlift);
      // push farther first so the nearer child is explored first
      if (dl <= dr) {
        stack[top++] = nd.right;
        stack[top++] = nd.left;
      } else {
        stack[top++] = nd.left;
        stack[top++] = nd.right;
      }
    }
  }
  return best;
}

i128 BoundaryGeometry::dist2_point_units(const Coord& x, int qscale) const {
  IBox q;
  q.lo = x;
  q.hi = x;
  return dist2_box_units(q, qscale);
}

double BoundaryGeometry::dist_point(const Coord& x, int qscale) const {
  const i128 d2 = dist2_point_units(x, qscale);
  const double unit = std::ldexp(1.0, -std::max(qscale, scale));
  return std::sqrt(double(d2)) * unit;
}

BoundaryGeometry build_boundary(const DomainSpec& spec) {
  BoundaryGeometry bg;
  bg.dim = spec.dim;
  bg.scale = spec.scale + 1;
  const int n = spec.dim;

  std::vector<const IBox*> cand;
  std::vector<i64> cuts[kMaxDim];
  for (size_t bi = 0; bi < spec.boxes.size(); ++bi) {
    const IBox& b = spec.boxes[bi];
    for (int axis = 0; axis < n; ++axis) {
      for (int side = 0; side < 2; ++side) {
        const i64 c = side ? b.hi[axis] : b.lo[axis];
        IBox face = b;
        face.lo[axis] = face.hi[axis] = c;
        cand.clear();
        for (const auto& o : spec.boxes)
          if (closed_meets(o, face, n)) cand.push_back(&o);
        // refine the face by every candidate's lateral breakpoints
        for (int d = 0; d < n; ++d) {
          if (d == axis) continue;
          auto& cs = cuts[d];
          cs.clear();
          cs.push_back(face.lo[d]);
          cs.push_back(face.hi[d]);
          for (const IBox* o : cand) {
            if (o->lo[d] > face.lo[d] && o->lo[d] < face.hi[d])
              cs.push_back(o->lo[d]);
            if (o->hi[d] > face.lo[d] && o->hi[d] < face.hi[d])
              cs.push_back(o->hi[d]);
          }
          std::sort(cs.begin(), cs.end());
          cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
        }
        // iterate the lateral grid
        const int d1 = axis == 0 ? 1 : 0;
        const int d2 = n == 3 ? (axis == 2 ? 1 : 2) : -1;
        const size_t n1 = cuts[d1].size() - 1;
        const size_t n2 = d2 >= 0 ? cuts[d2].size() - 1 : 1;
        for (size_t i1 = 0; i1 < n1; ++i1) {
          for (size_t i2 = 0; i2 < n2; ++i2) {
            IBox sub;  // at scale m for now
            sub.lo[axis] = sub.hi[axis] = c;
            sub.lo[d1] = cuts[d1][i1];
            sub.hi[d1] = cuts[d1][i1 + 1];
            if (d2 >= 0) {
              sub.lo[d2] = cuts[d2][i2];
              sub.hi[d2] = cuts[d2][i2 + 1];
            }
            Coord mid{};  // midpoint at scale m+1
            for (int d = 0; d < n; ++d) mid[d] = sub.lo[d] + sub.hi[d];
            if (interior_at(cand, n, mid)) continue;
            IBox out;
            for (int d = 0; d < n; ++d) {
              out.lo[d] = sub.lo[d] << 1;
              out.hi[d] = sub.hi[d] << 1;
            }
            bg.cells.push_back(out);
          }
        }
      }
    }
  }

  // abutting boxes can emit the same wall fragment twice
  std::sort(bg.cells.begin(), bg.cells.end(), [](const IBox& a, const IBox& b) {
    for (int d = 0; d < kMaxDim; ++d) {
      if (a.lo[d] != b.lo[d]) return a.lo[d] < b.lo[d];
      if (a.hi[d] != b.hi[d]) return a.hi[d] < b.hi[d];
    }
    return false;
  });
  bg.cells.erase(std::unique(bg.cells.begin(), bg.cells.end(),
                             [](const IBox& a, const IBox& b) {
                               return a.lo == b.lo && a.hi == b.hi;
                             }),
                 bg.cells.end());

  bg.order.resize(bg.cells.size());
  for (size_t i = 0; i < bg.order.size(); ++i) bg.order[i] = int(i);
  if (!bg.cells.empty()) {
    bg.nodes.reserve(bg.cells.size() / 2 + 1);
    TreeBuilder tb{bg.cells, bg.dim, bg.nodes, bg.order};
    tb.build(0, int(bg.cells.size()));
  }
  return bg;
}

}  // namespace caplab

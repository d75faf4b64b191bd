#include "core/domain.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace caplab {

const TaggedSet* DomainSpec::find_tag(const std::string& name) const {
  for (const auto& t : tags)
    if (t.name == name) return &t;
  return nullptr;
}

bool box_valid(const IBox& b, int dim) {
  for (int d = 0; d < dim; ++d)
    if (b.hi[d] <= b.lo[d]) return false;
  for (int d = dim; d < kMaxDim; ++d)
    if (b.lo[d] != 0 || b.hi[d] != 0) return false;
  return true;
}

i128 box_volume_units(const IBox& b, int dim) {
  i128 v = 1;
  for (int d = 0; d < dim; ++d) v *= (b.hi[d] - b.lo[d]);
  return v;
}

bool boxes_interior_overlap(const IBox& a, const IBox& b, int dim) {
  for (int d = 0; d < dim; ++d)
    if (std::min(a.hi[d], b.hi[d]) <= std::max(a.lo[d], b.lo[d])) return false;
  return true;
}

bool boxes_union_connected(const IBox& a, const IBox& b, int dim) {
  int zero_axes = 0;
  for (int d = 0; d < dim; ++d) {
    const i64 len = std::min(a.hi[d], b.hi[d]) - std::max(a.lo[d], b.lo[d]);
    if (len < 0) return false;
    if (len == 0) ++zero_axes;
  }
  return zero_axes <= 1;  // >=2 means touching only along an edge or corner
}

namespace {

// lo*2^-m vs x*2^-xs, strictness per the sigma side.
inline bool covers_side(i64 lo, i64 hi, int m, i64 x, int xs, bool plus) {
  if (plus)  // need lo <= x < hi
    return cmp_scaled(lo, m, x, xs) <= 0 && cmp_scaled(x, xs, hi, m) < 0;
  // need lo < x <= hi
  return cmp_scaled(lo, m, x, xs) < 0 && cmp_scaled(x, xs, hi, m) <= 0;
}

}  // namespace

bool contains_point(const DomainSpec& spec, const Coord& x, int xscale) {
  const int n = spec.dim;
  const int npat = 1 << n;
  for (int pat = 0; pat < npat; ++pat) {
    bool covered = false;
    for (const auto& b : spec.boxes) {
      bool ok = true;
      for (int d = 0; d < n && ok; ++d)
        ok = covers_side(b.lo[d], b.hi[d], spec.scale, x[d], xscale,
                         (pat >> d) & 1);
      if (ok) { covered = true; break; }
    }
    if (!covered) return false;
  }
  return true;
}

bool closed_contains_point(const DomainSpec& spec, const Coord& x, int xscale) {
  for (const auto& b : spec.boxes) {
    bool ok = true;
    for (int d = 0; d < spec.dim && ok; ++d)
      ok = cmp_scaled(b.lo[d], spec.scale, x[d], xscale) <= 0 &&
           cmp_scaled(x[d], xscale, b.hi[d], spec.scale) <= 0;
    if (ok) return true;
  }
  return false;
}

namespace {

// Exact union volume by coordinate sweep: slabs along `axis`, recurse on the
// boxes spanning each slab. Box counts here are small enough (<=10^4) that
// the O(E^dim) worst case never bites on the domains we build.
i128 sweep_volume(const std::vector<IBox>& boxes, int dim, int axis) {
  if (boxes.empty()) return 0;
  if (axis == dim) return 1;
  std::vector<i64> cuts;
  cuts.reserve(boxes.size() * 2);
  for (const auto& b : boxes) {
    cuts.push_back(b.lo[axis]);
    cuts.push_back(b.hi[axis]);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  i128 total = 0;
  std::vector<IBox> active;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const i64 a = cuts[i], b = cuts[i + 1];
    active.clear();
    for (const auto& bx : boxes)
      if (bx.lo[axis] <= a && bx.hi[axis] >= b) active.push_back(bx);
    if (!active.empty()) total += i128(b - a) * sweep_volume(active, dim, axis + 1);
  }
  return total;
}

}  // namespace

i128 union_volume_units(const std::vector<IBox>& boxes, int dim) {
  return sweep_volume(boxes, dim, 0);
}

i128 union_volume_units(const DomainSpec& spec) {
  return sweep_volume(spec.boxes, spec.dim, 0);
}

i128 clipped_volume_units(const IBox& clip, const std::vector<IBox>& boxes,
                          int dim) {
  std::vector<IBox> clipped;
  for (const auto& b : boxes) {
    IBox c;
    bool ok = true;
    for (int d = 0; d < dim; ++d) {
      c.lo[d] = std::max(b.lo[d], clip.lo[d]);
      c.hi[d] = std::min(b.hi[d], clip.hi[d]);
      if (c.hi[d] <= c.lo[d]) { ok = false; break; }
    }
    if (ok) clipped.push_back(c);
  }
  return sweep_volume(clipped, dim, 0);
}

namespace {

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(size_t n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int a) { return p[a] == a ? a : p[a] = find(p[a]); }
  void join(int a, int b) { p[find(a)] = find(b); }
};

}  // namespace

bool spec_connected(const DomainSpec& spec) {
  const size_t n = spec.boxes.size();
  if (n == 0) return false;
  UnionFind uf(n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      if (boxes_union_connected(spec.boxes[i], spec.boxes[j], spec.dim))
        uf.join(int(i), int(j));
  const int root = uf.find(0);
  for (size_t i = 1; i < n; ++i)
    if (uf.find(int(i)) != root) return false;
  return true;
}

bool validate_spec(const DomainSpec& spec, std::string* err) {
  auto fail = [&](const std::string& m) {
    if (err) *err = m;
    return false;
  };
  if (spec.dim != 2 && spec.dim != 3) return fail("dim must be 2 or 3");
  if (spec.scale < 0 || spec.scale > kMaxScale) return fail("scale out of range");
  if (spec.boxes.empty()) return fail("no boxes");
  for (const auto& b : spec.boxes)
    if (!box_valid(b, spec.dim)) return fail("degenerate box");
  for (const auto& t : spec.tags) {
    if (t.name.empty() || t.name.find(' ') != std::string::npos)
      return fail("bad tag name");
    for (const auto& b : t.boxes) {
      if (!box_valid(b, spec.dim)) return fail("degenerate tagged box in " + t.name);
      // tagged sets must lie in the closed union: exact covered-volume test
      if (clipped_volume_units(b, spec.boxes, spec.dim) !=
          box_volume_units(b, spec.dim))
        return fail("tagged set " + t.name + " leaves the domain");
    }
  }
  if (!contains_point(spec, spec.center, spec.scale))
    return fail("center not interior");
  if (!spec_connected(spec)) return fail("box union is not connected");
  return true;
}

DomainSpec rescale_spec(const DomainSpec& spec, int newscale) {
  DomainSpec out = spec;
  const int k = newscale - spec.scale;
  if (k <= 0) return out;
  auto lift = [&](IBox& b) {
    for (int d = 0; d < spec.dim; ++d) {
      b.lo[d] <<= k;
      b.hi[d] <<= k;
    }
  };
  for (auto& b : out.boxes) lift(b);
  for (auto& t : out.tags)
    for (auto& b : t.boxes) lift(b);
  for (int d = 0; d < spec.dim; ++d) out.center[d] <<= k;
  out.scale = newscale;
  return out;
}

void spec_bbox(const DomainSpec& spec, Coord* lo, Coord* hi) {
  lo->fill(0);
  hi->fill(0);
  for (int d = 0; d < spec.dim; ++d) {
    (*lo)[d] = spec.boxes[0].lo[d];
    (*hi)[d] = spec.boxes[0].hi[d];
  }
  for (const auto& b : spec.boxes)
    for (int d = 0; d < spec.dim; ++d) {
      (*lo)[d] = std::min((*lo)[d], b.lo[d]);
      (*hi)[d] = std::max((*hi)[d], b.hi[d]);
    }
}

std::string emit_domain(const DomainSpec& spec) {
  std::ostringstream os;
  os << "caplab-domain v1\n";
  os << "dim " << spec.dim << "\n";
  os << "scale " << spec.scale << "\n";
  os << "center";
  for (int d = 0; d < spec.dim; ++d) os << ' ' << spec.center[d];
  os << "\n";
  auto put_box = [&](const IBox& b) {
    for (int d = 0; d < spec.dim; ++d) os << ' ' << b.lo[d];
    for (int d = 0; d < spec.dim; ++d) os << ' ' << b.hi[d];
    os << "\n";
  };
  for (const auto& b : spec.boxes) {
    os << "box";
    put_box(b);
  }
  for (const auto& t : spec.tags)
    for (const auto& b : t.boxes) {
      os << "tagbox " << t.name;
      put_box(b);
    }
  return os.str();
}

bool parse_domain(const std::string& text, DomainSpec* out, std::string* err) {
  auto fail = [&](const std::string& m) {
    if (err) *err = m;
    return false;
  };
  DomainSpec spec;
  bool saw_header = false, saw_dim = false, saw_scale = false, saw_center = false;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    auto want_coords = [&](Coord* c) {
      for (int d = 0; d < spec.dim; ++d)
        if (!(ls >> (*c)[d])) return false;
      return true;
    };
    if (kw == "caplab-domain") {
      std::string ver;
      ls >> ver;
      if (ver != "v1") return fail("unsupported version");
      saw_header = true;
    } else if (kw == "dim") {
      if (!(ls >> spec.dim) || (spec.dim != 2 && spec.dim != 3))
        return fail("bad dim at line " + std::to_string(lineno));
      saw_dim = true;
    } else if (kw == "scale") {
      if (!(ls >> spec.scale) || spec.scale < 0 || spec.scale > kMaxScale)
        return fail("bad scale at line " + std::to_string(lineno));
      saw_scale = true;
    } else if (kw == "center") {
      if (!saw_dim || !want_coords(&spec.center))
        return fail("bad center at line " + std::to_string(lineno));
      saw_center = true;
    } else if (kw == "box" || kw == "tagbox") {
      if (!saw_dim) return fail("box before dim");
      std::string tag;
      if (kw == "tagbox" && !(ls >> tag))
        return fail("tagbox without name at line " + std::to_string(lineno));
      IBox b;
      if (!want_coords(&b.lo) || !want_coords(&b.hi))
        return fail("bad box at line " + std::to_string(lineno));
      if (!box_valid(b, spec.dim))
        return fail("degenerate box at line " + std::to_string(lineno));
      if (kw == "box") {
        spec.boxes.push_back(b);
      } else {
        TaggedSet* t = nullptr;
        for (auto& ts : spec.tags)
          if (ts.name == tag) t = &ts;
        if (!t) {
          spec.tags.push_back({tag, {}});
          t = &spec.tags.back();
        }
        t->boxes.push_back(b);
      }
    } else {
      return fail("unknown keyword '" + kw + "' at line " + std::to_string(lineno));
    }
  }
  if (!saw_header) return fail("missing caplab-domain header");
  if (!saw_dim || !saw_scale || !saw_center) return fail("incomplete header");
  std::string verr;
  if (!validate_spec(spec, &verr)) return fail("invalid domain: " + verr);
  *out = spec;
  return true;
}

}  // namespace caplab

#include "content.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace caplab {

namespace {

struct LatKey {
  Coord lat{};
  bool operator==(const LatKey& o) const { return lat == o.lat; }
};
struct LatKeyHash {
  size_t operator()(const LatKey& k) const {
    u64 h = 1469598103934665603ull;
    for (int d = 0; d < kMaxDim; ++d) {
      h ^= u64(k.lat[d]);
      h *= 1099511628211ull;
    }
    return size_t(h);
  }
};

double cube_cost(int n, double q, i64 gen) {
  // (diam/2)^q for a cube of side 2^-gen
  return std::pow(0.5 * std::sqrt(double(n)), q) * std::exp2(-double(gen) * q);
}

}  // namespace

bool family_disjoint(const CubeFamily& fam, std::string* why) {
  const int n = fam.dim;
  std::unordered_map<i64, std::unordered_set<LatKey, LatKeyHash>> by_gen;
  i64 gmin = 0;
  bool first = true;
  for (const DyadicCube& c : fam.cubes) {
    LatKey k;
    for (int d = 0; d < n; ++d) k.lat[d] = c.lat[d];
    if (!by_gen[c.gen].insert(k).second) {
      if (why) *why = "duplicate cube in family";
      return false;
    }
    if (first || c.gen < gmin) gmin = c.gen;
    first = false;
  }
  for (const DyadicCube& c : fam.cubes) {
    LatKey k;
    for (int d = 0; d < n; ++d) k.lat[d] = c.lat[d];
    for (i64 g = c.gen - 1; g >= gmin; --g) {
      for (int d = 0; d < n; ++d) k.lat[d] = floor_shr(k.lat[d], 1);
      auto it = by_gen.find(g);
      if (it != by_gen.end() && it->second.count(k)) {
        if (why) *why = "family cube nested inside another";
        return false;
      }
    }
  }
  return true;
}

bool dyadic_content(const CubeFamily& fam, double q, ContentResult* out,
                    std::string* err) {
  const int n = fam.dim;
  if (n < 1 || n > kMaxDim) {
    *err = "content: dimension out of range";
    return false;
  }
  if (!(q > 0.0) || q > double(n) + 1e-12) {
    *err = "content: need 0 < q <= n";
    return false;
  }
  std::string why;
  if (!family_disjoint(fam, &why)) {
    *err = "content: " + why;
    return false;
  }
  out->q = q;
  out->c_lo = 1.0;
  out->c_hi =
      std::min(std::exp2(double(n)) * std::pow(double(n), q / 2) * std::exp2(q),
               std::pow(std::ceil(2.0 * std::sqrt(double(n))) + 1.0, double(n)));
  out->ball_upper = 0.0;
  if (fam.cubes.empty()) {
    out->dyadic_value = 0.0;
    return true;
  }

  i64 gmin = fam.cubes[0].gen, gmax = fam.cubes[0].gen;
  for (const DyadicCube& c : fam.cubes) {
    gmin = std::min<i64>(gmin, c.gen);
    gmax = std::max<i64>(gmax, c.gen);
    if (c.gen < -30 || c.gen > kMaxScale) {
      *err = "content: cube generation out of range";
      return false;
    }
  }

  using Level = std::unordered_map<LatKey, double, LatKeyHash>;
  Level cur;
  for (i64 g = gmax;; --g) {
    // seed family cubes of this generation (leaves of the recursion)
    for (const DyadicCube& c : fam.cubes)
      if (c.gen == g) {
        LatKey k;
        for (int d = 0; d < n; ++d) k.lat[d] = c.lat[d];
        cur[k] = cube_cost(n, q, g);
      }
    if (g <= gmin) {
      // stop once every orthant holds at most one chain: coarser ancestors
      // only cost more, and chains in distinct orthants never merge
      int orth_count[1 << kMaxDim] = {0};
      bool single = true;
      for (const auto& kv : cur) {
        int o = 0;
        for (int d = 0; d < n; ++d)
          if (kv.first.lat[d] < 0) o |= 1 << d;
        if (++orth_count[o] > 1) {
          single = false;
          break;
        }
      }
      if (single) {
        double total = 0.0;
        for (const auto& kv : cur) total += kv.second;
        out->dyadic_value = total;
        return true;
      }
    }
    if (g < gmax - 200) {
      *err = "content: ancestor recursion failed to close";
      return false;
    }
    Level up;
    for (const auto& kv : cur) {
      LatKey pk;
      for (int d = 0; d < n; ++d) pk.lat[d] = floor_shr(kv.first.lat[d], 1);
      up[pk] += kv.second;
    }
    for (auto& kv : up) kv.second = std::min(kv.second, cube_cost(n, q, g - 1));
    cur = std::move(up);
  }
}

namespace {

struct Pt {
  double x[3] = {0, 0, 0};
};

struct Ball {
  double c[3] = {0, 0, 0};
  double r2 = -1.0;
};

double dist2(const Ball& b, const Pt& p, int n) {
  double s = 0;
  for (int d = 0; d < n; ++d) {
    const double t = p.x[d] - b.c[d];
    s += t * t;
  }
  return s;
}

bool inside(const Ball& b, const Pt& p, int n) {
  if (b.r2 < 0) return false;
  return dist2(b, p, n) <= b.r2 * (1.0 + 3e-12) + 1e-300;
}

Ball ball1(const Pt& a) {
  Ball b;
  for (int d = 0; d < 3; ++d) b.c[d] = a.x[d];
  b.r2 = 0;
  return b;
}

Ball ball2(const Pt& a, const Pt& p, int n) {
  Ball b;
  double r2 = 0;
  for (int d = 0; d < n; ++d) {
    b.c[d] = 0.5 * (a.x[d] + p.x[d]);
    const double t = 0.5 * (a.x[d] - p.x[d]);
    r2 += t * t;
  }
  b.r2 = r2;
  return b;
}

// grow the ball just enough to contain p (degenerate-support fallback)
Ball grow(Ball b, const Pt& p, int n) {
  b.r2 = std::max(b.r2, dist2(b, p, n));
  return b;
}

Ball ball3(const Pt& a, const Pt& b_, const Pt& c_, int n) {
  double u[3], v[3];
  double uu = 0, vv = 0, uv = 0;
  for (int d = 0; d < n; ++d) {
    u[d] = b_.x[d] - a.x[d];
    v[d] = c_.x[d] - a.x[d];
    uu += u[d] * u[d];
    vv += v[d] * v[d];
    uv += u[d] * v[d];
  }
  const double det = uu * vv - uv * uv;
  if (det <= 1e-14 * std::max(uu * vv, 1e-300)) {
    // collinear: smallest diametral ball of a pair, grown over the third
    Ball best;
    best.r2 = -1;
    const Pt* P[3] = {&a, &b_, &c_};
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        Ball cand = ball2(*P[i], *P[j], n);
        cand = grow(cand, *P[3 - i - j], n);
        if (best.r2 < 0 || cand.r2 < best.r2) best = cand;
      }
    return best;
  }
  const double x = (0.5 * uu * vv - 0.5 * vv * uv) / det;
  const double y = (0.5 * vv * uu - 0.5 * uu * uv) / det;
  Ball b;
  double r2 = 0;
  for (int d = 0; d < n; ++d) {
    b.c[d] = a.x[d] + x * u[d] + y * v[d];
    const double t = b.c[d] - a.x[d];
    r2 += t * t;
  }
  b.r2 = r2;
  return b;
}

Ball ball4(const Pt& a, const Pt& b_, const Pt& c_, const Pt& d_) {
  const int n = 3;
  double m[3][3], rhs[3];
  const Pt* P[3] = {&b_, &c_, &d_};
  for (int i = 0; i < 3; ++i) {
    double s = 0;
    for (int d = 0; d < n; ++d) {
      m[i][d] = P[i]->x[d] - a.x[d];
      s += m[i][d] * m[i][d];
    }
    rhs[i] = 0.5 * s;
  }
  // gaussian elimination with partial pivoting
  int perm[3] = {0, 1, 2};
  double scale = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) scale = std::max(scale, std::fabs(m[i][j]));
  bool singular = false;
  for (int col = 0; col < 3 && !singular; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::fabs(m[perm[r]][col]) > std::fabs(m[perm[piv]][col])) piv = r;
    std::swap(perm[col], perm[piv]);
    const double p = m[perm[col]][col];
    if (std::fabs(p) <= 1e-12 * std::max(scale, 1e-300)) {
      singular = true;
      break;
    }
    for (int r = col + 1; r < 3; ++r) {
      const double f = m[perm[r]][col] / p;
      for (int j = col; j < 3; ++j) m[perm[r]][j] -= f * m[perm[col]][j];
      rhs[perm[r]] -= f * rhs[perm[col]];
    }
  }
  if (singular) {
    // coplanar: best circumball of a triple, grown over the fourth
    const Pt* Q[4] = {&a, &b_, &c_, &d_};
    Ball best;
    best.r2 = -1;
    for (int skip = 0; skip < 4; ++skip) {
      const Pt* t[3];
      int w = 0;
      for (int i = 0; i < 4; ++i)
        if (i != skip) t[w++] = Q[i];
      Ball cand = ball3(*t[0], *t[1], *t[2], n);
      cand = grow(cand, *Q[skip], n);
      if (best.r2 < 0 || cand.r2 < best.r2) best = cand;
    }
    return best;
  }
  double lam[3];
  for (int col = 2; col >= 0; --col) {
    double s = rhs[perm[col]];
    for (int j = col + 1; j < 3; ++j) s -= m[perm[col]][j] * lam[j];
    lam[col] = s / m[perm[col]][col];
  }
  Ball b;
  double r2 = 0;
  for (int d = 0; d < n; ++d) {
    double cd = a.x[d];
    // rebuild the row vectors (m was destroyed by elimination)
    cd += lam[0] * (b_.x[d] - a.x[d]);
    cd += lam[1] * (c_.x[d] - a.x[d]);
    cd += lam[2] * (d_.x[d] - a.x[d]);
    b.c[d] = cd;
    const double t = cd - a.x[d];
    r2 += t * t;
  }
  b.r2 = r2;
  return b;
}

// smallest enclosing ball, Welzl move-to-front with fixed-seed shuffle
Ball meb(std::vector<Pt> pts, int n) {
  if (pts.empty()) return Ball{};
  std::mt19937 rng(0x243F6A88u);
  std::shuffle(pts.begin(), pts.end(), rng);
  Ball b = ball1(pts[0]);
  for (size_t i = 1; i < pts.size(); ++i) {
    if (inside(b, pts[i], n)) continue;
    b = ball1(pts[i]);
    for (size_t j = 0; j < i; ++j) {
      if (inside(b, pts[j], n)) continue;
      b = ball2(pts[i], pts[j], n);
      for (size_t k = 0; k < j; ++k) {
        if (inside(b, pts[k], n)) continue;
        b = ball3(pts[i], pts[j], pts[k], n);
        if (n >= 3) {
          for (size_t l = 0; l < k; ++l) {
            if (inside(b, pts[l], n)) continue;
            b = ball4(pts[i], pts[j], pts[k], pts[l]);
          }
        }
      }
    }
  }
  return b;
}

}  // namespace

bool ball_cover_upper(const CubeFamily& fam, double q, double* out,
                      std::string* err) {
  const int n = fam.dim;
  if (n < 1 || n > kMaxDim) {
    *err = "content: dimension out of range";
    return false;
  }
  if (!(q > 0.0) || q > double(n) + 1e-12) {
    *err = "content: need 0 < q <= n";
    return false;
  }
  std::string why;
  if (!family_disjoint(fam, &why)) {
    *err = "content: " + why;
    return false;
  }
  if (fam.cubes.empty()) {
    *out = 0.0;
    return true;
  }
  if (fam.cubes.size() > 1024) {
    *err = "content: family too large for the greedy ball merge";
    return false;
  }

  struct Group {
    std::vector<Pt> pts;
    double cost = 0;
    bool alive = true;
  };
  std::vector<Group> groups;
  groups.reserve(fam.cubes.size());
  for (const DyadicCube& c : fam.cubes) {
    Group g;
    for (int corner = 0; corner < (1 << n); ++corner) {
      Pt p;
      for (int d = 0; d < n; ++d)
        p.x[d] = std::ldexp(double(c.lat[d] + ((corner >> d) & 1)), -c.gen);
      g.pts.push_back(p);
    }
    const Ball b = meb(g.pts, n);
    g.cost = std::pow(std::sqrt(b.r2), q);
    groups.push_back(std::move(g));
  }

  const size_t G = groups.size();
  auto merged_cost = [&](size_t i, size_t j) {
    std::vector<Pt> pts = groups[i].pts;
    pts.insert(pts.end(), groups[j].pts.begin(), groups[j].pts.end());
    const Ball b = meb(std::move(pts), n);
    return std::pow(std::sqrt(b.r2), q);
  };
  // pair matrix of merged costs, refreshed per merge on the surviving row
  std::vector<double> pairc(G * G, 0.0);
  long evals = 0;
  const long kBudget = 4000000;
  for (size_t i = 0; i < G; ++i)
    for (size_t j = i + 1; j < G; ++j) {
      pairc[i * G + j] = merged_cost(i, j);
      ++evals;
    }
  while (evals < kBudget) {
    double best_delta = -1e-15;
    size_t bi = G, bj = G;
    for (size_t i = 0; i < G; ++i) {
      if (!groups[i].alive) continue;
      for (size_t j = i + 1; j < G; ++j) {
        if (!groups[j].alive) continue;
        const double delta =
            pairc[i * G + j] - (groups[i].cost + groups[j].cost);
        if (delta < best_delta) {
          best_delta = delta;
          bi = i;
          bj = j;
        }
      }
    }
    if (bi == G) break;
    groups[bi].pts.insert(groups[bi].pts.end(), groups[bj].pts.begin(),
                          groups[bj].pts.end());
    groups[bi].cost = pairc[bi * G + bj];
    groups[bj].alive = false;
    groups[bj].pts.clear();
    for (size_t k = 0; k < G; ++k) {
      if (!groups[k].alive || k == bi) continue;
      const size_t a = std::min(k, bi), b = std::max(k, bi);
      pairc[a * G + b] = merged_cost(a, b);
      ++evals;
    }
  }
  double total = 0;
  for (const Group& g : groups)
    if (g.alive) total += g.cost;
  *out = total;
  return true;
}

namespace {

// canonical greedy dyadic partition of [lo, hi): at x take the largest
// aligned power of two that still fits
bool intervals_1d(i64 lo, i64 hi, std::vector<std::pair<i64, int>>* out,
                  std::string* err) {
  i64 x = lo;
  while (x < hi) {
    int e = 0;
    if (x == 0) {
      e = 62;
    } else {
      e = __builtin_ctzll(u64(x));
      if (e > 62) e = 62;
    }
    while (e > 0 && (i64(1) << e) > hi - x) --e;
    out->push_back({x, e});
    x += i64(1) << e;
    if (out->size() > 100000) {
      *err = "content: tagged box has too fine a dyadic structure";
      return false;
    }
  }
  return true;
}

}  // namespace

bool family_from_tag(const DomainSpec& spec, const std::string& tag,
                     CubeFamily* out, std::string* err) {
  const TaggedSet* ts = spec.find_tag(tag);
  if (!ts) {
    *err = "content: unknown tag '" + tag + "'";
    return false;
  }
  out->dim = spec.dim;
  out->cubes.clear();
  const i64 kMaxCubes = 4000000;
  for (const IBox& b : ts->boxes) {
    bool degenerate = false;
    for (int d = 0; d < spec.dim; ++d)
      if (b.hi[d] <= b.lo[d]) degenerate = true;
    if (degenerate) continue;
    std::vector<std::pair<i64, int>> iv[kMaxDim];
    for (int d = 0; d < spec.dim; ++d)
      if (!intervals_1d(b.lo[d], b.hi[d], &iv[d], err)) return false;
    // walk the rectangle product; cut each rectangle into cubes of its
    // smallest side (alignment is inherited: 2^emin divides every lo)
    size_t idx[kMaxDim] = {0};
    while (true) {
      int emin = 63;
      for (int d = 0; d < spec.dim; ++d)
        emin = std::min(emin, iv[d][idx[d]].second);
      i64 count = 1;
      for (int d = 0; d < spec.dim; ++d) {
        const int sh = iv[d][idx[d]].second - emin;
        if (sh >= 23) {
          *err = "content: tag subdivides into too many cubes";
          return false;
        }
        count *= i64(1) << sh;
      }
      if (i64(out->cubes.size()) + count > kMaxCubes) {
        *err = "content: tag subdivides into too many cubes";
        return false;
      }
      const i64 side = i64(1) << emin;
      Coord sub{};
      while (true) {
        DyadicCube c;
        c.gen = spec.scale - emin;
        for (int d = 0; d < spec.dim; ++d)
          c.lat[d] = (iv[d][idx[d]].first + sub[d] * side) >> emin;
        out->cubes.push_back(c);
        int d = 0;
        for (; d < spec.dim; ++d) {
          if (++sub[d] < (i64(1) << (iv[d][idx[d]].second - emin))) break;
          sub[d] = 0;
        }
        if (d == spec.dim) break;
      }
      int d = 0;
      for (; d < spec.dim; ++d) {
        if (++idx[d] < iv[d].size()) break;
        idx[d] = 0;
      }
      if (d == spec.dim) break;
    }
  }
  std::string why;
  if (!family_disjoint(*out, &why)) {
    *err = "content: tagged boxes overlap: " + why;
    return false;
  }
  return true;
}

std::string emit_family(const CubeFamily& fam) {
  std::ostringstream os;
  os << "caplab-family v1\n";
  os << "dim " << fam.dim << "\n";
  for (const DyadicCube& c : fam.cubes) {
    os << "cube " << c.gen;
    for (int d = 0; d < fam.dim; ++d) os << " " << c.lat[d];
    os << "\n";
  }
  return os.str();
}

bool parse_family(const std::string& text, CubeFamily* out, std::string* err) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "caplab-family v1") {
    *err = "family parse: bad header";
    return false;
  }
  out->dim = 0;
  out->cubes.clear();
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "dim") {
      if (!(ls >> out->dim) || out->dim < 1 || out->dim > kMaxDim) {
        *err = "family parse: bad dim";
        return false;
      }
    } else if (kw == "cube") {
      if (out->dim == 0) {
        *err = "family parse: cube before dim";
        return false;
      }
      DyadicCube c;
      if (!(ls >> c.gen)) {
        *err = "family parse: bad cube line";
        return false;
      }
      for (int d = 0; d < out->dim; ++d)
        if (!(ls >> c.lat[d])) {
          *err = "family parse: bad cube line";
          return false;
        }
      out->cubes.push_back(c);
    } else {
      *err = "family parse: unknown keyword '" + kw + "'";
      return false;
    }
  }
  if (out->dim == 0) {
    *err = "family parse: missing dim";
    return false;
  }
  return true;
}

}  // namespace caplab

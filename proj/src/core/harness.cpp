#include "harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <thread>

#include "capacity.hpp"
#include "constructions.hpp"
#include "content.hpp"
#include "domain.hpp"
#include "grid.hpp"
#include "svg.hpp"
#include "whitney.hpp"

namespace caplab {

namespace {

// single-core CG on multi-million-cell elongated grids runs for tens of
// minutes; cap the optional cross-check well below that
constexpr i64 kGlobalCellBudget = 1000 * 1000;
constexpr double kRatioSlopeFloor = -0.05;
constexpr double kContentRatioTol = 2.0;

double nan_val() { return std::numeric_limits<double>::quiet_NaN(); }

std::string fmt(const char* f, ...)
#if defined(__GNUC__)
    __attribute__((format(printf, 1, 2)))
#endif
    ;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// ---- config ---------------------------------------------------------------

struct Config {
  std::string op;
  std::string family;
  std::string mode = "full";
  std::string solver = "windowed";
  int n = 2, a = 1, jmin = 0, jmax = 0, gshift = 0;
  Dyadic s{1, 0};
  double s_real = 1.0;
  double p = 2.0, q = 0.0, eps = 0.1;
  double delta = 1e-6, tol = 0.0, collar = 0.0, slope_tol = 0.2;
  bool have_q = false, have_jmin = false, have_jmax = false;
  std::string csv_path, svg_path;
};

bool parse_int(const std::string& v, int* out) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') return false;
  if (x < -1000000 || x > 1000000) return false;
  *out = int(x);
  return true;
}

bool parse_real(const std::string& v, double* out) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') return false;
  if (!std::isfinite(x)) return false;
  *out = x;
  return true;
}

bool parse_config(const std::string& text, Config* cfg, std::string* err) {
  size_t pos = 0;
  int lineno = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    const size_t sp = line.find_first_of(" \t");
    if (sp == std::string::npos) {
      *err = fmt("config line %d: expected 'key value'", lineno);
      return false;
    }
    const std::string key = line.substr(0, sp);
    const size_t vb = line.find_first_not_of(" \t", sp);
    if (vb == std::string::npos) {
      *err = fmt("config line %d: missing value for '%s'", lineno,
                 key.c_str());
      return false;
    }
    std::string val = line.substr(vb);

    bool ok = true;
    if (key == "op")
      cfg->op = val;
    else if (key == "family")
      cfg->family = val;
    else if (key == "mode")
      cfg->mode = val;
    else if (key == "solver")
      cfg->solver = val;
    else if (key == "n")
      ok = parse_int(val, &cfg->n);
    else if (key == "a")
      ok = parse_int(val, &cfg->a);
    else if (key == "jmin") {
      ok = parse_int(val, &cfg->jmin);
      cfg->have_jmin = true;
    } else if (key == "jmax") {
      ok = parse_int(val, &cfg->jmax);
      cfg->have_jmax = true;
    } else if (key == "gshift")
      ok = parse_int(val, &cfg->gshift);
    else if (key == "s") {
      ok = parse_dyadic(val, &cfg->s);
      if (ok) cfg->s_real = cfg->s.to_double();
    } else if (key == "p")
      ok = parse_real(val, &cfg->p);
    else if (key == "q") {
      ok = parse_real(val, &cfg->q);
      cfg->have_q = true;
    } else if (key == "eps")
      ok = parse_real(val, &cfg->eps);
    else if (key == "delta")
      ok = parse_real(val, &cfg->delta);
    else if (key == "tol")
      ok = parse_real(val, &cfg->tol);
    else if (key == "collar")
      ok = parse_real(val, &cfg->collar);
    else if (key == "slope_tol")
      ok = parse_real(val, &cfg->slope_tol);
    else if (key == "csv")
      cfg->csv_path = val;
    else if (key == "svg")
      cfg->svg_path = val;
    else {
      *err = fmt("config line %d: unknown key '%s'", lineno, key.c_str());
      return false;
    }
    if (!ok) {
      *err = fmt("config line %d: bad value for '%s'", lineno, key.c_str());
      return false;
    }
  }

  if (cfg->op != "sharpness" && cfg->op != "counterexample" &&
      cfg->op != "lowerbound") {
    *err = "config: op must be sharpness, counterexample or lowerbound";
    return false;
  }
  const std::string want_family =
      cfg->op == "counterexample" ? "tree" : "rooms";
  if (cfg->family.empty()) cfg->family = want_family;
  if (cfg->family != want_family) {
    *err = fmt("config: op %s needs the %s family", cfg->op.c_str(),
               want_family.c_str());
    return false;
  }
  if (cfg->n != 2 && cfg->n != 3) {
    *err = "config: n must be 2 or 3";
    return false;
  }
  if (!cfg->have_jmin || !cfg->have_jmax) {
    *err = "config: jmin and jmax are required";
    return false;
  }
  if (cfg->jmin < 1 || cfg->jmax < cfg->jmin || cfg->jmax > 24) {
    *err = "config: need 1 <= jmin <= jmax <= 24";
    return false;
  }
  if (!(cfg->p > 1.0) || cfg->p > double(cfg->n)) {
    *err = fmt("config: p must lie in (1, n] = (1, %d]", cfg->n);
    return false;
  }
  if (cfg->s_real < 1.0) {
    *err = "config: need s >= 1";
    return false;
  }
  if (cfg->a < 1) {
    *err = "config: need a >= 1";
    return false;
  }
  if (cfg->solver != "windowed" && cfg->solver != "global") {
    *err = "config: solver must be windowed or global";
    return false;
  }
  if (cfg->mode != "full" && cfg->mode != "thinned") {
    *err = "config: mode must be full or thinned";
    return false;
  }
  if (cfg->delta <= 0.0 || cfg->delta > 0.1) {
    *err = "config: delta must lie in (0, 0.1]";
    return false;
  }
  if (cfg->collar < 0.0) {
    *err = "config: collar must be >= 0";
    return false;
  }
  if (cfg->gshift < -10 || cfg->gshift > 10) {
    *err = "config: gshift must lie in [-10, 10]";
    return false;
  }
  if (cfg->slope_tol <= 0.0 || cfg->slope_tol > 2.0) {
    *err = "config: slope_tol must lie in (0, 2]";
    return false;
  }

  const double np1 = double(cfg->n - 1) * cfg->s_real + 1.0 - cfg->p;
  if (cfg->op == "counterexample") {
    if (std::floor(cfg->s_real) != cfg->s_real) {
      *err = "config: the tree family needs integral s";
      return false;
    }
    if (!cfg->have_q) {
      *err = "config: counterexample needs q";
      return false;
    }
    const double bound = std::min(np1, double(cfg->n));
    if (!(cfg->q > 0.0)) {
      *err = "config: need q > 0";
      return false;
    }
    if (!(cfg->q < bound)) {
      *err = fmt("config: counterexample regime needs q < min((n-1)s+1-p, n) "
                 "= %.12g; q = %.12g is refused (the borderline case is an "
                 "open problem, not a target)",
                 bound, cfg->q);
      return false;
    }
    if (cfg->p > 2.0 && cfg->solver != "global") {
      *err = "config: the per-leg sum bound needs p <= 2; use solver global";
      return false;
    }
  }
  if (cfg->op == "lowerbound") {
    if (!cfg->have_q) {
      *err = "config: lowerbound needs q";
      return false;
    }
    if (!(cfg->q > 0.0) || cfg->q > double(cfg->n)) {
      *err = fmt("config: content exponent q must lie in (0, n] = (0, %d]",
                 cfg->n);
      return false;
    }
    if (!(cfg->eps > 0.0) || cfg->eps >= 1.0) {
      *err = "config: need 0 < eps < 1";
      return false;
    }
    // the proof needs eps < p+q-n as well; enforce the stricter bound
    if (!(cfg->eps < cfg->p + cfg->q - cfg->n)) {
      *err = fmt("config: need eps < p+q-n = %.12g (stricter than eps < 1)",
                 cfg->p + cfg->q - cfg->n);
      return false;
    }
    const double rhs = np1 + cfg->eps;
    if (!(cfg->q >= rhs)) {
      *err = fmt("config: hypothesis q >= s(n-1)+1-p+eps violated: "
                 "q = %.12g < %.12g",
                 cfg->q, rhs);
      return false;
    }
  }
  if (cfg->op == "sharpness" && cfg->have_q &&
      (!(cfg->q > 0.0) || cfg->q > double(cfg->n))) {
    *err = fmt("config: content exponent q must lie in (0, n] = (0, %d]",
               cfg->n);
    return false;
  }
  return true;
}

// ---- shared plumbing ------------------------------------------------------

int thread_cap() {
  const char* v = std::getenv("CAPLAB_THREADS");
  if (!v || !*v) return 1;
  const int t = std::atoi(v);
  return t < 1 ? 1 : (t > 64 ? 64 : t);
}

struct Task {
  const DomainSpec* spec = nullptr;
  WindowJob job;
  int g = 0;
  double p = 2.0, delta = 0.0, tol = 0.0;
};

// One solve per task; values never depend on the worker count, only the
// wall time does.
void run_tasks(const std::vector<Task>& tasks, std::vector<CapacityResult>* res,
               std::vector<std::string>* errs) {
  res->assign(tasks.size(), CapacityResult{});
  errs->assign(tasks.size(), std::string());
  const int T =
      std::min(thread_cap(), int(std::max<size_t>(tasks.size(), 1)));
  auto work = [&](int w) {
    WindowMemo memo;
    for (size_t i = size_t(w); i < tasks.size(); i += size_t(T)) {
      const Task& t = tasks[i];
      std::string e;
      if (!windowed_capacity(*t.spec, t.job, t.g, t.p, t.delta, t.tol, &memo,
                             &(*res)[i], nullptr, &e))
        (*errs)[i] = e.empty() ? "windowed solve failed" : e;
    }
  };
  if (T <= 1) {
    work(0);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 1; w < T; ++w) pool.emplace_back(work, w);
  work(0);
  for (std::thread& th : pool) th.join();
}

bool central_cube(const DomainSpec& spec, DyadicCube* q0, std::string* err) {
  WhitneyDecomposition w;
  if (!whitney_decompose(spec, 8, &w, err)) return false;
  if (w.central >= w.cubes.size()) {
    *err = "harness: no central cube at depth 8";
    return false;
  }
  *q0 = w.cubes[w.central];
  return true;
}

// 0 = solved, 1 = over the cell budget (skip quietly), 2 = error
int global_capacity(const DomainSpec& spec, const std::string& e_tag,
                    const DyadicCube& q0, int g, double p, double delta,
                    double tol, double* out, std::string* err) {
  Coord lo, hi;
  spec_bbox(spec, &lo, &hi);
  double cells = 1.0;
  for (int d = 0; d < spec.dim; ++d)
    cells *= double(hi[d] - lo[d]) * std::exp2(double(g - spec.scale));
  if (cells > double(kGlobalCellBudget)) return 1;
  VoxelGrid grid;
  if (!rasterize(spec, g, &grid, err)) return 2;
  Condenser cond;
  if (!assemble(spec, grid, e_tag, q0, p, delta, &cond, err)) return 2;
  CapacityResult r;
  bool ok;
  if (p == 2.0 && delta == 0.0)
    ok = solve_p2(cond, tol, nullptr, &r, err);
  else
    ok = solve_p(cond, tol, nullptr, &r, err);
  if (!ok) return 2;
  *out = r.value;
  return 0;
}

bool tag_content(const DomainSpec& spec, const std::string& tag, double q,
                 double* out, std::string* err) {
  CubeFamily fam;
  if (!family_from_tag(spec, tag, &fam, err)) return false;
  ContentResult cr;
  if (!dyadic_content(fam, q, &cr, err)) return false;
  *out = cr.dyadic_value;
  return true;
}

// window = room + corridor + a collar in the core below the corridor mouth
bool rooms_window(const DomainSpec& spec, int j, double collar_cfg,
                  WindowJob* out, std::string* err) {
  const TaggedSet* room = spec.find_tag(fmt("E%d", j));
  const TaggedSet* corr = spec.find_tag(fmt("C%d", j));
  if (!room || !corr || room->boxes.size() != 1 || corr->boxes.size() != 1) {
    *err = fmt("harness: rooms domain lacks tags E%d/C%d", j, j);
    return false;
  }
  const IBox& rb = room->boxes[0];
  const IBox& cb = corr->boxes[0];
  const int up = spec.dim - 1;
  const i64 wu = cb.hi[0] - cb.lo[0];       // corridor width, units
  const i64 ru = cb.hi[up] - cb.lo[up];     // corridor length, units
  i64 c = std::min(8 * wu, std::max<i64>(ru / 2, 1));
  if (collar_cfg > 0.0) {
    c = i64(std::llround(collar_cfg * std::exp2(double(spec.scale))));
    if (c < 1) c = 1;
  }
  IBox collar = cb;
  for (int d = 0; d < spec.dim; ++d) {
    if (d == up) continue;
    collar.lo[d] = cb.lo[d] - c;
    collar.hi[d] = cb.hi[d] + c;
  }
  collar.hi[up] = cb.lo[up];
  collar.lo[up] = cb.lo[up] - c;
  out->window = {rb, cb, collar};
  out->plate0 = {rb};
  out->plate1.clear();
  return true;
}

// window = leg room + passage + a collar inside the parent box at the mouth
WindowJob tree_leg_window(const TreeLeg& leg, int dim, double collar_cfg,
                          int scale) {
  const IBox& pb = leg.passage;
  const IBox& rb = leg.room;
  const i64 wu = pb.hi[1] - pb.lo[1];
  const i64 lu = pb.hi[0] - pb.lo[0];
  i64 c = std::min(8 * wu, std::max<i64>(lu / 2, 1));
  if (collar_cfg > 0.0) {
    c = i64(std::llround(collar_cfg * std::exp2(double(scale))));
    if (c < 1) c = 1;
  }
  const i64 mouth = leg.sigma[0] > 0 ? pb.lo[0] : pb.hi[0];
  IBox collar = pb;
  collar.lo[0] = leg.sigma[0] > 0 ? mouth - c : mouth;
  collar.hi[0] = leg.sigma[0] > 0 ? mouth : mouth + c;
  for (int d = 1; d < dim; ++d) {
    collar.lo[d] = pb.lo[d] - c;
    collar.hi[d] = pb.hi[d] + c;
  }
  WindowJob job;
  job.window = {rb, pb, collar};
  job.plate0 = {rb};
  return job;
}

// ---- report assembly ------------------------------------------------------

void csv_field(std::string* s, double v, bool last = false) {
  if (std::isfinite(v)) *s += fmt("%.12g", v);
  if (!last) *s += ',';
}

std::string build_csv(const Config& cfg, const std::vector<ExperimentRow>& rows) {
  std::string s = "family,n,s,p,q,eps,j,scale,capacity,cap_mode,content,ratio\n";
  for (const ExperimentRow& r : rows) {
    s += cfg.family + ',';
    s += fmt("%d,", cfg.n);
    csv_field(&s, cfg.s_real);
    csv_field(&s, cfg.p);
    csv_field(&s, cfg.have_q ? cfg.q : nan_val());
    csv_field(&s, cfg.op == "lowerbound" ? cfg.eps : nan_val());
    s += fmt("%d,", r.j);
    csv_field(&s, r.scale);
    csv_field(&s, r.capacity);
    s += r.cap_mode + ',';
    csv_field(&s, r.content);
    csv_field(&s, r.ratio, true);
    s += '\n';
  }
  return s;
}

bool write_text_file(const std::string& path, const std::string& text,
                     std::string* err) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) {
    *err = "harness: cannot open '" + path + "' for writing";
    return false;
  }
  const size_t wrote = std::fwrite(text.data(), 1, text.size(), fp);
  std::fclose(fp);
  if (wrote != text.size()) {
    *err = "harness: short write to '" + path + "'";
    return false;
  }
  return true;
}

struct Checks {
  std::vector<std::string> lines;  // summary body
  bool pass = true;
  void check(bool ok, const std::string& line) {
    lines.push_back((ok ? "ok   " : "FAIL ") + line);
    if (!ok) pass = false;
  }
  void note(const std::string& line) { lines.push_back("note " + line); }
};

}  // namespace

// ---- fit -------------------------------------------------------------------

bool fit_exponent(const std::vector<std::array<double, 2>>& points,
                  double* slope, double* intercept, double* max_resid,
                  std::string* err) {
  if (points.size() < 2) {
    *err = "fit: need at least 2 points";
    return false;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& pt : points) {
    if (!(pt[0] > 0.0) || !(pt[1] > 0.0)) {
      *err = "fit: points must be positive in both coordinates";
      return false;
    }
    const double x = std::log(pt[0]), y = std::log(pt[1]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = double(points.size());
  const double det = n * sxx - sx * sx;
  if (!(std::fabs(det) > 1e-300)) {
    *err = "fit: degenerate abscissae (all scales equal)";
    return false;
  }
  *slope = (n * sxy - sx * sy) / det;
  *intercept = (sy - *slope * sx) / n;
  double mr = 0.0;
  for (const auto& pt : points) {
    const double r =
        std::fabs(std::log(pt[1]) - (*intercept + *slope * std::log(pt[0])));
    mr = std::max(mr, r);
  }
  *max_resid = mr;
  return true;
}

// ---- the experiment driver ------------------------------------------------

namespace {

// sharpness and lowerbound: rooms family, one window per generation
int run_rooms_ops(const Config& cfg, ExperimentReport* rep, std::string* err) {
  RoomsParams rp;
  rp.n = cfg.n;
  rp.s = cfg.s;
  rp.a = cfg.a;
  rp.J = cfg.jmax;
  DomainSpec spec;
  if (!rooms_and_corridors(rp, &spec, err)) return 2;

  const i64 as = (i64(cfg.a) * cfg.s.num) >> cfg.s.scale;
  const bool want_content = cfg.have_q;
  const double theta =
      cfg.op == "lowerbound"
          ? (cfg.s_real * (cfg.n - 1) + 1.0 - cfg.p + cfg.eps) / cfg.q
          : 0.0;

  struct RowPlan {
    int j = 0, g = 0;
    bool excluded = false;
    std::string note;
    int task = -1;
  };
  std::vector<RowPlan> plan;
  std::vector<Task> tasks;
  const double delta = cfg.p == 2.0 ? 0.0 : cfg.delta;
  for (int j = cfg.jmin; j <= cfg.jmax; ++j) {
    RowPlan rpl;
    rpl.j = j;
    int g = int(as * j + 2 + cfg.gshift);
    if (g < spec.scale) g = spec.scale;
    if (g > kMaxScale - 2) {
      *err = fmt("harness: grid scale 2^-%d at j = %d exceeds the precision "
                 "budget",
                 g, j);
      return 2;
    }
    rpl.g = g;
    if (g - as * j < 2) {
      rpl.excluded = true;
      rpl.note = fmt("under-resolved corridor at j = %d (width < 4 cells)", j);
    } else if (cfg.solver == "windowed") {
      Task t;
      t.spec = &spec;
      if (!rooms_window(spec, j, cfg.collar, &t.job, err)) return 2;
      t.g = g;
      t.p = cfg.p;
      t.delta = delta;
      t.tol = cfg.tol;
      rpl.task = int(tasks.size());
      tasks.push_back(std::move(t));
    }
    plan.push_back(std::move(rpl));
  }

  std::vector<CapacityResult> res;
  std::vector<std::string> terrs;
  run_tasks(tasks, &res, &terrs);
  for (const std::string& e : terrs)
    if (!e.empty()) {
      *err = e;
      return 2;
    }

  DyadicCube q0{};
  bool have_q0 = false;
  Checks checks;
  int cross_done = 0, cross_ok = 0;
  bool crossed_once = false;

  for (const RowPlan& rpl : plan) {
    ExperimentRow row;
    row.j = rpl.j;
    row.scale = std::exp2(double(-i64(cfg.a) * rpl.j));
    row.capacity = nan_val();
    row.content = nan_val();
    row.ratio = nan_val();
    row.excluded = rpl.excluded;
    row.note = rpl.note;
    if (rpl.excluded) {
      row.cap_mode = "excluded";
      rep->rows.push_back(row);
      continue;
    }
    if (want_content) {
      if (!tag_content(spec, fmt("E%d", rpl.j), cfg.q, &row.content, err))
        return 2;
    }

    double global_val = nan_val();
    int have_global = 1;
    const bool want_cross =
        cfg.solver == "windowed" && rpl.j <= 2 && !crossed_once;
    if (cfg.solver == "global" || want_cross) {
      if (!have_q0) {
        if (!central_cube(spec, &q0, err)) return 2;
        have_q0 = true;
      }
      have_global = global_capacity(spec, fmt("E%d", rpl.j), q0, rpl.g, cfg.p,
                                    delta, cfg.tol, &global_val, err);
      if (have_global == 2) return 2;
      if (cfg.solver == "global" && have_global == 1) {
        *err = fmt("harness: global solve at j = %d exceeds the cell budget; "
                   "use solver windowed",
                   rpl.j);
        return 2;
      }
    }

    if (cfg.solver == "windowed") {
      row.capacity = res[size_t(rpl.task)].value;
      row.cap_mode = "windowed";
      if (cfg.op == "lowerbound" && std::isfinite(row.content) &&
          row.content > 0.0)
        row.ratio = row.capacity / std::pow(row.content, theta);
      rep->rows.push_back(row);
      if (want_cross && have_global == 0) {
        crossed_once = true;
        ++cross_done;
        const bool ok = row.capacity >= global_val * (1.0 - 1e-6);
        if (ok) ++cross_ok;
        checks.check(ok, fmt("windowed >= global at j = %d (%.12g >= %.12g)",
                             rpl.j, row.capacity, global_val));
        ExperimentRow grow = row;
        grow.capacity = global_val;
        grow.cap_mode = "global";
        grow.content = nan_val();
        grow.ratio = nan_val();
        rep->rows.push_back(grow);
      }
    } else {
      row.capacity = global_val;
      row.cap_mode = "global";
      if (cfg.op == "lowerbound" && std::isfinite(row.content) &&
          row.content > 0.0)
        row.ratio = row.capacity / std::pow(row.content, theta);
      rep->rows.push_back(row);
    }
  }

  // fit over the primary rows (global cross-check rows are not part of the
  // fitted series)
  std::vector<std::array<double, 2>> pts;
  for (const ExperimentRow& r : rep->rows) {
    if (r.excluded) continue;
    if (cfg.solver == "windowed" && r.cap_mode == "global") continue;
    if (cfg.op == "lowerbound") {
      if (std::isfinite(r.ratio) && r.ratio > 0.0)
        pts.push_back({1.0 / r.scale, r.ratio});
    } else {
      if (std::isfinite(r.capacity) && r.capacity > 0.0)
        pts.push_back({r.scale, r.capacity});
    }
  }

  rep->crosschecks = cross_done;
  rep->crosschecks_ok = cross_ok;

  if (cfg.op == "lowerbound") {
    rep->target = kRatioSlopeFloor;
    rep->tol = 0.0;
    double mr = std::numeric_limits<double>::infinity();
    for (const ExperimentRow& r : rep->rows)
      if (!r.excluded && std::isfinite(r.ratio)) mr = std::min(mr, r.ratio);
    rep->min_ratio = std::isfinite(mr) ? mr : nan_val();
    checks.check(std::isfinite(mr) && mr > 0.0,
                 fmt("min ratio %.12g > 0", rep->min_ratio));
    if (cfg.p + cfg.q - cfg.n < 1.0)
      checks.note(fmt("eps bound tightened to eps < p+q-n = %.12g",
                      cfg.p + cfg.q - cfg.n));
    if (pts.size() >= 3) {
      std::string ferr;
      if (!fit_exponent(pts, &rep->slope, &rep->intercept, &rep->max_resid,
                        &ferr)) {
        *err = ferr;
        return 2;
      }
      rep->have_fit = true;
      checks.check(rep->slope >= kRatioSlopeFloor,
                   fmt("ratio slope (vs 1/r_j) %.12g >= %.12g", rep->slope,
                       kRatioSlopeFloor));
    } else {
      checks.note("slope skipped (fewer than 3 rows)");
    }
  } else {
    rep->target = double(cfg.n - 1) * cfg.s_real + 1.0 - cfg.p;
    rep->tol = cfg.slope_tol;
    if (pts.size() >= 3) {
      std::string ferr;
      if (!fit_exponent(pts, &rep->slope, &rep->intercept, &rep->max_resid,
                        &ferr)) {
        *err = ferr;
        return 2;
      }
      rep->have_fit = true;
      checks.check(std::fabs(rep->slope - rep->target) <= rep->tol,
                   fmt("capacity slope %.12g within %.12g of %.12g",
                       rep->slope, rep->tol, rep->target));
    } else {
      checks.check(false, "slope unavailable (fewer than 3 usable rows)");
    }
  }

  rep->pass = checks.pass;
  rep->summary = fmt("op %s family %s n %d s %.12g a %d p %.12g", cfg.op.c_str(),
                     cfg.family.c_str(), cfg.n, cfg.s_real, cfg.a, cfg.p);
  if (cfg.have_q) rep->summary += fmt(" q %.12g", cfg.q);
  if (cfg.op == "lowerbound") rep->summary += fmt(" eps %.12g", cfg.eps);
  rep->summary += fmt(" j %d..%d solver %s\n", cfg.jmin, cfg.jmax,
                      cfg.solver.c_str());
  int excl = 0;
  for (const ExperimentRow& r : rep->rows) excl += r.excluded ? 1 : 0;
  rep->summary += fmt("rows %zu excluded %d\n", rep->rows.size(), excl);
  if (rep->have_fit)
    rep->summary += fmt("fit slope %.12g intercept %.12g max_resid %.12g\n",
                        rep->slope, rep->intercept, rep->max_resid);
  for (const std::string& l : checks.lines) rep->summary += l + "\n";
  rep->summary += rep->pass ? "result PASS\n" : "result FAIL\n";
  return rep->pass ? 0 : 1;
}

int run_tree_op(const Config& cfg, ExperimentReport* rep, std::string* err) {
  const int s_int = int(cfg.s_real);
  const double delta = cfg.p == 2.0 ? 0.0 : cfg.delta;

  // one tree per generation: the step-j geometry of deeper trees is
  // identical, and building to depth j keeps the step-j rooms leaves, so a
  // leg window's 0-plate never touches occupied cells outside the window
  std::vector<DomainSpec> specs(size_t(cfg.jmax) + 1);
  std::vector<TreeStructure> sts(size_t(cfg.jmax) + 1);
  for (int j = cfg.jmin; j <= cfg.jmax; ++j) {
    TreeParams tp;
    tp.n = cfg.n;
    tp.s = s_int;
    tp.q = cfg.q;
    tp.J = j;
    tp.mode = cfg.mode == "thinned" ? TreeMode::kThinned : TreeMode::kFull;
    if (!branching_tree(tp, &specs[size_t(j)], &sts[size_t(j)], err)) return 2;
  }

  struct RowPlan {
    int j = 0, g = 0;
    bool excluded = false;
    std::string note;
    std::vector<int> tasks;
  };
  std::vector<RowPlan> plan;
  std::vector<Task> tasks;
  for (int j = cfg.jmin; j <= cfg.jmax; ++j) {
    const DomainSpec& spec = specs[size_t(j)];
    RowPlan rpl;
    rpl.j = j;
    int g = spec.scale + 1 + cfg.gshift;
    if (g < spec.scale) g = spec.scale;
    if (g > kMaxScale - 2) {
      *err = fmt("harness: grid scale 2^-%d at j = %d exceeds the precision "
                 "budget",
                 g, j);
      return 2;
    }
    rpl.g = g;
    // passage width is 2^-(js+1); require >= 4 cells across
    if (g - (i64(j) * s_int + 1) < 2) {
      rpl.excluded = true;
      rpl.note = fmt("under-resolved passage at j = %d (width < 4 cells)", j);
    } else if (cfg.solver == "windowed") {
      for (const TreeLeg& leg : sts[size_t(j)].legs) {
        if (leg.step != j) continue;
        Task t;
        t.spec = &spec;
        t.job = tree_leg_window(leg, cfg.n, cfg.collar, spec.scale);
        t.g = g;
        t.p = cfg.p;
        t.delta = delta;
        t.tol = cfg.tol;
        rpl.tasks.push_back(int(tasks.size()));
        tasks.push_back(std::move(t));
      }
    }
    plan.push_back(std::move(rpl));
  }

  std::vector<CapacityResult> res;
  std::vector<std::string> terrs;
  run_tasks(tasks, &res, &terrs);
  for (const std::string& e : terrs)
    if (!e.empty()) {
      *err = e;
      return 2;
    }

  Checks checks;
  int cross_done = 0, cross_ok = 0;
  bool crossed_once = false;
  for (const RowPlan& rpl : plan) {
    const DomainSpec& spec = specs[size_t(rpl.j)];
    ExperimentRow row;
    row.j = rpl.j;
    row.scale = std::exp2(double(-rpl.j));
    row.capacity = nan_val();
    row.content = nan_val();
    row.ratio = nan_val();
    row.excluded = rpl.excluded;
    row.note = rpl.note;
    if (!tag_content(spec, fmt("E%d", rpl.j), cfg.q, &row.content, err))
      return 2;
    if (rpl.excluded) {
      row.cap_mode = "excluded";
      rep->rows.push_back(row);
      continue;
    }

    double global_val = nan_val();
    int have_global = 1;
    const bool want_cross =
        cfg.solver == "windowed" && rpl.j <= 2 && !crossed_once;
    if (cfg.solver == "global" || want_cross) {
      DyadicCube q0{};
      if (!central_cube(spec, &q0, err)) return 2;
      have_global = global_capacity(spec, fmt("E%d", rpl.j), q0, rpl.g, cfg.p,
                                    delta, cfg.tol, &global_val, err);
      if (have_global == 2) return 2;
      if (cfg.solver == "global" && have_global == 1) {
        *err = fmt("harness: global solve at j = %d exceeds the cell budget; "
                   "use solver windowed",
                   rpl.j);
        return 2;
      }
    }

    if (cfg.solver == "windowed") {
      double sum = 0.0;
      for (int ti : rpl.tasks) sum += res[size_t(ti)].value;
      row.capacity = sum;
      row.cap_mode = "windowed-sum";
      rep->rows.push_back(row);
      if (want_cross && have_global == 0) {
        crossed_once = true;
        ++cross_done;
        const bool ok = row.capacity >= global_val * (1.0 - 1e-6);
        if (ok) ++cross_ok;
        checks.check(ok, fmt("windowed >= global at j = %d (%.12g >= %.12g)",
                             rpl.j, row.capacity, global_val));
        ExperimentRow grow = row;
        grow.capacity = global_val;
        grow.cap_mode = "global";
        grow.content = nan_val();
        rep->rows.push_back(grow);
      }
    } else {
      row.capacity = global_val;
      row.cap_mode = "global";
      rep->rows.push_back(row);
    }
  }

  rep->crosschecks = cross_done;
  rep->crosschecks_ok = cross_ok;

  // content uniformity over the generations
  double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0;
  for (const ExperimentRow& r : rep->rows) {
    if (r.cap_mode == "global" && cfg.solver == "windowed") continue;
    if (std::isfinite(r.content)) {
      cmin = std::min(cmin, r.content);
      cmax = std::max(cmax, r.content);
    }
  }
  rep->content_ratio = (cmin > 0.0 && std::isfinite(cmin)) ? cmax / cmin
                                                           : nan_val();
  checks.check(std::isfinite(rep->content_ratio) &&
                   rep->content_ratio <= kContentRatioTol,
               fmt("content max/min %.12g <= %.12g", rep->content_ratio,
                   kContentRatioTol));

  std::vector<std::array<double, 2>> pts;
  for (const ExperimentRow& r : rep->rows) {
    if (r.excluded) continue;
    if (cfg.solver == "windowed" && r.cap_mode == "global") continue;
    if (std::isfinite(r.capacity) && r.capacity > 0.0)
      pts.push_back({r.scale, r.capacity});
  }
  rep->target = double(cfg.n - 1) * cfg.s_real - cfg.p - cfg.q + 1.0;
  rep->tol = cfg.slope_tol;
  if (pts.size() >= 3) {
    std::string ferr;
    if (!fit_exponent(pts, &rep->slope, &rep->intercept, &rep->max_resid,
                      &ferr)) {
      *err = ferr;
      return 2;
    }
    rep->have_fit = true;
    checks.check(std::fabs(rep->slope - rep->target) <= rep->tol,
                 fmt("capacity decay %.12g within %.12g of %.12g", rep->slope,
                     rep->tol, rep->target));
  } else {
    checks.note("slope skipped (fewer than 3 rows)");
  }

  rep->pass = checks.pass;
  rep->summary = fmt("op %s family %s n %d s %d mode %s p %.12g q %.12g "
                     "j %d..%d solver %s\n",
                     cfg.op.c_str(), cfg.family.c_str(), cfg.n, s_int,
                     cfg.mode.c_str(), cfg.p, cfg.q, cfg.jmin, cfg.jmax,
                     cfg.solver.c_str());
  int excl = 0;
  for (const ExperimentRow& r : rep->rows) excl += r.excluded ? 1 : 0;
  rep->summary += fmt("rows %zu excluded %d\n", rep->rows.size(), excl);
  if (rep->have_fit)
    rep->summary += fmt("fit slope %.12g intercept %.12g max_resid %.12g\n",
                        rep->slope, rep->intercept, rep->max_resid);
  for (const std::string& l : checks.lines) rep->summary += l + "\n";
  rep->summary += rep->pass ? "result PASS\n" : "result FAIL\n";
  return rep->pass ? 0 : 1;
}

}  // namespace

int run_experiment(const std::string& config_text, ExperimentReport* report,
                   std::string* err) {
  *report = ExperimentReport{};
  Config cfg;
  std::string perr;
  if (!parse_config(config_text, &cfg, &perr)) {
    *err = perr;
    return 2;
  }
  report->op = cfg.op;
  report->family = cfg.family;
  report->mode = cfg.mode;
  report->n = cfg.n;
  report->a = cfg.a;
  report->jmin = cfg.jmin;
  report->jmax = cfg.jmax;
  report->s = cfg.s_real;
  report->p = cfg.p;
  report->q = cfg.q;
  report->eps = cfg.eps;
  report->have_q = cfg.have_q;
  report->have_eps = cfg.op == "lowerbound";

  const int rc = cfg.op == "counterexample" ? run_tree_op(cfg, report, err)
                                            : run_rooms_ops(cfg, report, err);
  if (rc == 2) return 2;

  report->csv = build_csv(cfg, report->rows);
  if (!cfg.csv_path.empty() &&
      !write_text_file(cfg.csv_path, report->csv, err))
    return 2;
  if (!cfg.svg_path.empty()) {
    DomainSpec spec;
    std::string berr;
    if (cfg.family == "rooms") {
      RoomsParams rp;
      rp.n = cfg.n;
      rp.s = cfg.s;
      rp.a = cfg.a;
      rp.J = cfg.jmax;
      if (!rooms_and_corridors(rp, &spec, &berr)) {
        *err = berr;
        return 2;
      }
    } else {
      TreeParams tp;
      tp.n = cfg.n;
      tp.s = int(cfg.s_real);
      tp.q = cfg.q;
      tp.J = cfg.jmax;
      tp.mode = cfg.mode == "thinned" ? TreeMode::kThinned : TreeMode::kFull;
      if (!branching_tree(tp, &spec, nullptr, &berr)) {
        *err = berr;
        return 2;
      }
    }
    std::string svg;
    if (!render_domain_svg(spec, nullptr, &svg, err)) return 2;
    if (!write_text_file(cfg.svg_path, svg, err)) return 2;
  }
  return rc;
}

}  // namespace caplab

// C binding over the core library. All state crosses the boundary as opaque
// handles or caller-owned strings; error text is thread-local.

#include "caplab/caplab.h"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "core/capacity.hpp"
#include "core/constructions.hpp"
#include "core/content.hpp"
#include "core/domain.hpp"
#include "core/grid.hpp"
#include "core/harness.hpp"
#include "core/sjohn.hpp"
#include "core/svg.hpp"
#include "core/whitney.hpp"

using caplab::i64;

struct caplab_domain {
  caplab::DomainSpec spec;
};

namespace {

thread_local std::string g_err;

caplab_status fail(caplab_status code, const std::string& msg) {
  g_err = msg.empty() ? "unspecified error" : msg;
  return code;
}

caplab_status give_string(const std::string& s, char** out) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) return fail(CAPLAB_ENOMEM, "out of memory");
  std::memcpy(p, s.c_str(), s.size() + 1);
  *out = p;
  return CAPLAB_OK;
}

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

bool central_cube(const caplab::DomainSpec& spec, caplab::DyadicCube* q0,
                  std::string* err) {
  caplab::WhitneyDecomposition w;
  if (!caplab::whitney_decompose(spec, 8, &w, err)) return false;
  if (w.central >= w.cubes.size()) {
    *err = "no central cube at depth 8";
    return false;
  }
  *q0 = w.cubes[w.central];
  return true;
}

}  // namespace

extern "C" {

const char* caplab_last_error(void) { return g_err.c_str(); }

void caplab_string_free(char* s) { std::free(s); }

void caplab_domain_free(caplab_domain* d) { delete d; }

caplab_status caplab_domain_parse(const char* text, caplab_domain** out) {
  if (!text || !out) return fail(CAPLAB_EINVAL, "null argument");
  try {
    auto d = new caplab_domain;
    std::string err;
    if (!caplab::parse_domain(text, &d->spec, &err)) {
      delete d;
      return fail(CAPLAB_EPARSE, err);
    }
    *out = d;
    return CAPLAB_OK;
  } catch (const std::bad_alloc&) {
    return fail(CAPLAB_ENOMEM, "out of memory");
  }
}

caplab_status caplab_domain_emit(const caplab_domain* d, char** out_text) {
  if (!d || !out_text) return fail(CAPLAB_EINVAL, "null argument");
  try {
    return give_string(caplab::emit_domain(d->spec), out_text);
  } catch (const std::bad_alloc&) {
    return fail(CAPLAB_ENOMEM, "out of memory");
  }
}

caplab_status caplab_domain_build_rooms(int n, const char* s, int a, int J,
                                        caplab_domain** out) {
  if (!s || !out) return fail(CAPLAB_EINVAL, "null argument");
  try {
    caplab::RoomsParams rp;
    rp.n = n;
    rp.a = a;
    rp.J = J;
    if (!caplab::parse_dyadic(s, &rp.s))
      return fail(CAPLAB_EPARSE, fmt("'%s' is not a dyadic rational", s));
    auto d = new caplab_domain;
    std::string err;
    if (!caplab::rooms_and_corridors(rp, &d->spec, &err)) {
      delete d;
      return fail(CAPLAB_EGEOM, err);
    }
    *out = d;
    return CAPLAB_OK;
  } catch (const std::bad_alloc&) {
    return fail(CAPLAB_ENOMEM, "out of memory");
  }
}

caplab_status caplab_domain_build_tree(int n, int s, double q, int J,
                                       int thinned, caplab_domain** out) {
  if (!out) return fail(CAPLAB_EINVAL, "null argument");
  try {
    caplab::TreeParams tp;
    tp.n = n;
    tp.s = s;
    tp.q = q;
    tp.J = J;
    tp.mode = thinned ? caplab::TreeMode::kThinned : caplab::TreeMode::kFull;
    auto d = new caplab_domain;
    std::string err;
    if (!caplab::branching_tree(tp, &d->spec, nullptr, &err)) {
      delete d;
      return fail(CAPLAB_EGEOM, err);
    }
    *out = d;
    return CAPLAB_OK;
  } catch (const std::bad_alloc&) {
    return fail(CAPLAB_ENOMEM, "out of memory");
  }
}

caplab_status caplab_domain_build_replacement(const caplab_domain* base,
                                              const char* s, int max_gen,
                                              caplab_domain** out) {
  if (!base || !s || !out) return fail(CAPLAB_EINVAL, "null argument");
  try {
    caplab::Dyadic sd;
    if (!caplab::parse_dyadic(s, &sd))
      return fail(CAPLAB_EPARSE, fmt("'%s' is not a dyadic rational", s));
    caplab::WhitneyDecomposition w;
    std::string err;
    if (!caplab::whitney_decompose(base->spec, max_gen, &w, &err))
      return fail(CAPLAB_EGEOM, err);
    auto d = new caplab_domain;
    if (!caplab::room_passage_replacement(base->spec, sd, w, &d->spec, &err)) {
      delete d;
      return fail(CAPLAB_EGEOM, err);
    }
    *out = d;
    return CAPLAB_OK;
  } catch (const std::bad_alloc&) {
    return fail(CAPLAB_ENOMEM, "out of memory");
  }
}

caplab_status caplab_whitney(const caplab_domain* d, int max_gen,
                             char** out_cubes, char** out_report) {
  if (!d || !out_cubes || !out_report)
    return fail(CAPLAB_EINVAL, "null argument");
  try {
    caplab::WhitneyDecomposition w;
    std::string err;
    if (!caplab::whitney_decompose(d->spec, max_gen, &w, &err))
      return fail(CAPLAB_EGEOM, err);
    const std::vector<std::string> bad = caplab::whitney_verify(w, d->spec);
    std::string report;
    for (const std::string& b : bad) report += b + "\n";
    char* cubes = nullptr;
    caplab_status rc = give_string(caplab::emit_whitney(w), &cubes);
    if (rc != CAPLAB_OK) return rc;
    rc = give_string(report, out_report);
    if (rc != CAPLAB_OK) {
      std::free(cubes);
      return rc;
    }
    *out_cubes = cubes;
    return CAPLAB_OK;
  } catch (const std::bad_alloc&) {
    return fail(CAPLAB_ENOMEM, "out of memory");
  }
}

namespace {

caplab_status content_record(const caplab::CubeFamily& fam, double q,
                             double* value, char** out_record) {
  caplab::ContentResult cr;
  std::string err;
  if (!caplab::dyadic_content(fam, q, &cr, &err))
    return fail(CAPLAB_EGEOM, err);
  if (!caplab::ball_cover_upper(fam, q, &cr.ball_upper, &err))
    return fail(CAPLAB_EGEOM, err);
  if (value) *value = cr.dyadic_value;
  if (out_record) {
    std::string rec;
    rec += fmt("q %.12g\n", cr.q);
    rec += fmt("dyadic %.12g\n", cr.dyadic_value);
    rec += fmt("ball_upper %.12g\n", cr.ball_upper);
    rec += fmt("c_lo %.12g\n", cr.c_lo);
    rec += fmt("c_hi %.12g\n", cr.c_hi);
    rec += fmt("cubes %zu\n", fam.cubes.size());
    return give_string(rec, out_record);
  }
  return CAPLAB_OK;
}

}  // namespace

caplab_status caplab_content_tag(const caplab_domain* d, const char* tag,
                                 double q, double* value, char** out_record) {
  if (!d || !tag) return fail(CAPLAB_EINVAL, "null argument");
  try {
    caplab::CubeFamily fam;
    std::string err;
    if (!caplab::family_from_tag(d->spec, tag, &fam, &err))
      return fail(CAPLAB_EGEOM, err);
    return content_record(fam, q, value, out_record);
  } catch (const std::bad_alloc&) {
    return fail(CAPLAB_ENOMEM, "out of memory");
  }
}

caplab_status caplab_content_family(const char* family_text, double q,
                                    double* value, char** out_record) {
  if (!family_text) return fail(CAPLAB_EINVAL, "null argument");
  try {
    caplab::CubeFamily fam;
    std::string err;
    if (!caplab::parse_family(family_text, &fam, &err))
      return fail(CAPLAB_EPARSE, err);
    return content_record(fam, q, value, out_record);
  } catch (const std::bad_alloc&) {
    return fail(CAPLAB_ENOMEM, "out of memory");
  }
}

caplab_status caplab_capacity(const caplab_domain* d, const char* e_tag,
                              const char* window_tag, int g, double p,
                              double delta, double tol,
                              const char* field_path, char** out_record) {
  if (!d || !e_tag) return fail(CAPLAB_EINVAL, "null argument");
  try {
    const caplab::DomainSpec& spec = d->spec;
    std::string err;
    caplab::CapacityResult res;
    caplab::PotentialField field;
    caplab::PotentialField* fptr = field_path ? &field : nullptr;
    const char* mode = window_tag ? "windowed" : "global";
    if (window_tag) {
      const caplab::TaggedSet* wt = spec.find_tag(window_tag);
      const caplab::TaggedSet* et = spec.find_tag(e_tag);
      if (!wt)
        return fail(CAPLAB_EINVAL, fmt("unknown tag '%s'", window_tag));
      if (!et) return fail(CAPLAB_EINVAL, fmt("unknown tag '%s'", e_tag));
      caplab::WindowJob job;
      job.window = wt->boxes;
      job.plate0 = et->boxes;
      if (!caplab::windowed_capacity(spec, job, g, p, delta, tol, nullptr,
                                     &res, fptr, &err))
        return fail(CAPLAB_ESOLVE, err);
    } else {
      caplab::DyadicCube q0{};
      if (!central_cube(spec, &q0, &err)) return fail(CAPLAB_EGEOM, err);
      caplab::VoxelGrid grid;
      if (!caplab::rasterize(spec, g, &grid, &err))
        return fail(CAPLAB_EGEOM, err);
      caplab::Condenser cond;
      if (!caplab::assemble(spec, grid, e_tag, q0, p, delta, &cond, &err))
        return fail(CAPLAB_EGEOM, err);
      bool ok;
      if (p == 2.0 && delta == 0.0)
        ok = caplab::solve_p2(cond, tol, fptr, &res, &err);
      else
        ok = caplab::solve_p(cond, tol, fptr, &res, &err);
      if (!ok) return fail(CAPLAB_ESOLVE, err);
    }
    if (field_path && !caplab::write_field(field, field_path, &err))
      return fail(CAPLAB_EIO, err);
    if (out_record) {
      std::string rec;
      rec += fmt("value %.12g\n", res.value);
      rec += fmt("mode %s\n", mode);
      rec += fmt("h %.17g\n", res.h);
      rec += fmt("p %.12g\n", res.p);
      rec += fmt("delta %.12g\n", res.delta);
      rec += fmt("iterations %ld\n", res.iterations);
      rec += fmt("grad_norm %.6g\n", res.grad_norm);
      rec += fmt("upper_bound %d\n", res.upper_bound ? 1 : 0);
      return give_string(rec, out_record);
    }
    return CAPLAB_OK;
  } catch (const std::bad_alloc&) {
    return fail(CAPLAB_ENOMEM, "out of memory");
  }
}

caplab_status caplab_sjohn(const caplab_domain* d, double s, int g,
                           long samples, char** out_record) {
  if (!d || !out_record) return fail(CAPLAB_EINVAL, "null argument");
  if (samples < 1) return fail(CAPLAB_EINVAL, "samples must be >= 1");
  try {
    caplab::JohnEstimate est;
    std::string err;
    if (!caplab::john_constant(d->spec, s, g, size_t(samples), &est, &err))
      return fail(CAPLAB_EGEOM, err);
    std::string rec;
    rec += fmt("C %.12g\n", est.C);
    rec += fmt("h %.17g\n", est.h);
    rec += fmt("argmax_cell %lld\n", (long long)est.argmax_cell);
    rec += fmt("samples %zu\n", est.samples);
    return give_string(rec, out_record);
  } catch (const std::bad_alloc&) {
    return fail(CAPLAB_ENOMEM, "out of memory");
  }
}

caplab_status caplab_sjohn_point(const caplab_domain* d, double s, int g,
                                 const char* point, int witness,
                                 char** out_record) {
  if (!d || !point || !out_record) return fail(CAPLAB_EINVAL, "null argument");
  try {
    const caplab::DomainSpec& spec = d->spec;
    double xy[3] = {0, 0, 0};
    {
      std::string tok;
      int k = 0;
      for (const char* c = point;; ++c) {
        if (*c == ',' || *c == '\0') {
          if (k >= spec.dim || tok.empty())
            return fail(CAPLAB_EINVAL,
                        fmt("point '%s' needs %d comma-separated coordinates",
                            point, spec.dim));
          char* end = nullptr;
          xy[k] = std::strtod(tok.c_str(), &end);
          if (end == tok.c_str() || *end != '\0')
            return fail(CAPLAB_EINVAL, fmt("bad coordinate '%s'", tok.c_str()));
          ++k;
          tok.clear();
          if (*c == '\0') break;
        } else {
          tok += *c;
        }
      }
      if (k != spec.dim)
        return fail(CAPLAB_EINVAL,
                    fmt("point '%s' needs %d comma-separated coordinates",
                        point, spec.dim));
    }
    std::string err;
    caplab::VoxelGrid grid;
    if (!caplab::rasterize(spec, g, &grid, &err))
      return fail(CAPLAB_EGEOM, err);
    int iv[3] = {0, 0, 0};
    for (int dd = 0; dd < spec.dim; ++dd) {
      const double t = std::floor((xy[dd] - grid.origin[dd]) / grid.h);
      if (t < 0 || t >= double(grid.dims[dd]))
        return fail(CAPLAB_EGEOM, "point lies outside the grid");
      iv[dd] = int(t);
    }
    const i64 cell = i64(grid.index(iv[0], iv[1], iv[2]));
    if (!grid.occupied(size_t(cell)))
      return fail(CAPLAB_EGEOM,
                  "point is not inside the domain at this resolution");
    caplab::BoundaryGeometry bg = caplab::build_boundary(spec);
    caplab::DistanceField dist = caplab::distance_field(grid, bg);
    i64 x0 = 0;
    if (!caplab::center_cell(spec, grid, &x0, &err))
      return fail(CAPLAB_EGEOM, err);
    double C = 0.0;
    if (!caplab::john_constant_point(grid, dist, cell, x0, s, 0.0, &C, &err))
      return fail(CAPLAB_EGEOM, err);
    std::string rec;
    rec += fmt("C %.12g\n", C);
    rec += fmt("h %.17g\n", grid.h);
    rec += fmt("cell %lld\n", (long long)cell);
    rec += fmt("center_cell %lld\n", (long long)x0);
    if (witness) {
      caplab::JohnQuery q;
      q.grid = &grid;
      q.dist = &dist;
      q.x = cell;
      q.x0 = x0;
      q.s = s;
      q.C = C;
      std::vector<i64> path;
      if (caplab::john_feasible(q, &path)) {
        rec += "witness";
        for (i64 c : path) rec += fmt(" %lld", (long long)c);
        rec += "\n";
      }
    }
    return give_string(rec, out_record);
  } catch (const std::bad_alloc&) {
    return fail(CAPLAB_ENOMEM, "out of memory");
  }
}

caplab_status caplab_experiment_run(const char* config_text,
                                    char** out_summary, char** out_csv) {
  if (!config_text) return fail(CAPLAB_EINVAL, "null argument");
  try {
    caplab::ExperimentReport rep;
    std::string err;
    const int rc = caplab::run_experiment(config_text, &rep, &err);
    if (rc == 2) return fail(CAPLAB_EINVAL, err);
    if (out_summary) {
      const caplab_status s = give_string(rep.summary, out_summary);
      if (s != CAPLAB_OK) return s;
    }
    if (out_csv) {
      const caplab_status s = give_string(rep.csv, out_csv);
      if (s != CAPLAB_OK) return s;
    }
    if (rc == 1) return fail(CAPLAB_EFAIL, "a declared check failed");
    return CAPLAB_OK;
  } catch (const std::bad_alloc&) {
    return fail(CAPLAB_ENOMEM, "out of memory");
  }
}

caplab_status caplab_render_svg(const caplab_domain* d, const char* field_path,
                                char** out_svg) {
  if (!d || !out_svg) return fail(CAPLAB_EINVAL, "null argument");
  try {
    std::string err;
    caplab::PotentialField field;
    caplab::PotentialField* fptr = nullptr;
    if (field_path) {
      if (!caplab::read_field(field_path, &field, &err))
        return fail(CAPLAB_EIO, err);
      fptr = &field;
    }
    std::string svg;
    if (!caplab::render_domain_svg(d->spec, fptr, &svg, &err))
      return fail(CAPLAB_EGEOM, err);
    return give_string(svg, out_svg);
  } catch (const std::bad_alloc&) {
    return fail(CAPLAB_ENOMEM, "out of memory");
  }
}

}  // extern "C"

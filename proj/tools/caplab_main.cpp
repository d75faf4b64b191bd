// caplab: command line front end over the C API.
//
// Subcommands: build, whitney, content, capacity, sjohn, experiment, render.
// All deterministic: no timestamps, no machine identifiers, byte-stable
// output for identical inputs.

#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "caplab/caplab.h"

namespace {

bool slurp(const std::string& path, std::string* out, std::string* err) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    *err = "cannot open '" + path + "'";
    return false;
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  *out = ss.str();
  return true;
}

bool spill(const std::string& path, const std::string& text,
           std::string* err) {
  if (path.empty()) {
    fwrite(text.data(), 1, text.size(), stdout);
    return true;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    *err = "cannot write '" + path + "'";
    return false;
  }
  f.write(text.data(), std::streamsize(text.size()));
  return f.good();
}

int die(const std::string& msg) {
  fprintf(stderr, "error: %s\n", msg.c_str());
  return 2;
}

int die_api() { return die(caplab_last_error()); }

// caplab_domain with scoped lifetime
struct Domain {
  caplab_domain* d = nullptr;
  ~Domain() { caplab_domain_free(d); }
};

bool load_domain(const std::string& path, Domain* dom, std::string* err) {
  std::string text;
  if (!slurp(path, &text, err)) return false;
  if (caplab_domain_parse(text.c_str(), &dom->d) != CAPLAB_OK) {
    *err = caplab_last_error();
    return false;
  }
  return true;
}

// mesh h must be an exact power of two; returns the grid depth g
bool h_to_g(double h, int* g, std::string* err) {
  if (!(h > 0) || h > 1) {
    *err = "h must lie in (0, 1]";
    return false;
  }
  const double lg = -std::log2(h);
  const int gi = int(std::lround(lg));
  if (std::ldexp(1.0, -gi) != h) {
    *err = "h must be a power of two (use --g for the exponent directly)";
    return false;
  }
  *g = gi;
  return true;
}

struct BuildArgs {
  std::string family;
  int n = 2;
  std::string s = "1";
  int a = 1;
  double q = 1.0;
  int J = 1;
  std::string mode = "full";
  std::string base;
  int max_gen = -1;
  std::string out;
};

int run_build(const BuildArgs& args) {
  Domain dom;
  if (args.family == "rooms") {
    if (caplab_domain_build_rooms(args.n, args.s.c_str(), args.a, args.J,
                                  &dom.d) != CAPLAB_OK)
      return die_api();
  } else if (args.family == "tree") {
    char* end = nullptr;
    const long sl = std::strtol(args.s.c_str(), &end, 10);
    if (end == args.s.c_str() || *end != '\0')
      return die("tree family needs an integral --s");
    if (caplab_domain_build_tree(args.n, int(sl), args.q, args.J,
                                 args.mode == "thinned" ? 1 : 0,
                                 &dom.d) != CAPLAB_OK)
      return die_api();
  } else {  // replacement
    if (args.base.empty())
      return die("replacement family needs --base FILE");
    Domain base;
    std::string err;
    if (!load_domain(args.base, &base, &err)) return die(err);
    if (caplab_domain_build_replacement(base.d, args.s.c_str(), args.max_gen,
                                        &dom.d) != CAPLAB_OK)
      return die_api();
  }
  char* text = nullptr;
  if (caplab_domain_emit(dom.d, &text) != CAPLAB_OK) return die_api();
  std::string err;
  const bool ok = spill(args.out, text, &err);
  caplab_string_free(text);
  return ok ? 0 : die(err);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for box-union domains: geometry, "
               "Whitney cubes, dyadic content, condenser p-capacity, and "
               "discrete s-John constants"};
  // --h is a mesh-size option below, so help must not claim -h
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(1);

  BuildArgs build;
  CLI::App* cb = app.add_subcommand(
      "build", "construct a benchmark domain and print its text form");
  cb->add_option("--family", build.family, "rooms | tree | replacement")
      ->required()
      ->check(CLI::IsMember({"rooms", "tree", "replacement"}));
  cb->add_option("--n", build.n, "ambient dimension (2 or 3)");
  cb->add_option("--s", build.s, "elongation exponent (dyadic, e.g. 1.5)");
  cb->add_option("--a", build.a, "rooms: room size decay r_j = 2^-aj");
  cb->add_option("--q", build.q, "tree thinned mode: keep ceil(2^(qj)) legs");
  cb->add_option("--J", build.J, "number of generations")->required();
  cb->add_option("--mode", build.mode, "tree: full | thinned")
      ->check(CLI::IsMember({"full", "thinned"}));
  cb->add_option("--base", build.base, "replacement: base domain file");
  cb->add_option("--max-gen", build.max_gen,
                 "replacement: Whitney truncation depth (-1 = default)");
  cb->add_option("-o,--out", build.out, "output file (default stdout)");

  std::string wh_file, wh_out;
  int wh_max_gen = -1;
  CLI::App* cw = app.add_subcommand(
      "whitney", "decompose a domain into Whitney cubes and re-verify");
  cw->add_option("file", wh_file, "domain file")->required();
  cw->add_option("--max-gen", wh_max_gen, "truncation depth (-1 = default)");
  cw->add_option("-o,--out", wh_out, "cube list output (default stdout)");

  std::string ct_file, ct_set;
  double ct_q = 1.0;
  CLI::App* cc = app.add_subcommand(
      "content", "dyadic Hausdorff q-content of a cube family");
  cc->add_option("file", ct_file, "family file, or domain file with --set")
      ->required();
  cc->add_option("--q", ct_q, "content exponent q > 0")->required();
  cc->add_option("--set", ct_set, "tag naming the cube set inside a domain");

  std::string cp_file, cp_set, cp_window, cp_field;
  double cp_p = 2.0, cp_h = 0.0, cp_delta = 0.0, cp_tol = 0.0;
  int cp_g = -1;
  bool cp_global = false, cp_sweep = false;
  CLI::App* cpc = app.add_subcommand(
      "capacity", "condenser p-capacity between a tagged set and the center");
  cpc->add_option("file", cp_file, "domain file")->required();
  cpc->add_option("--set", cp_set, "tag of the inner plate (e.g. E3)")
      ->required();
  cpc->add_option("--p", cp_p, "exponent p > 1");
  cpc->add_option("--g", cp_g, "grid depth, mesh h = 2^-g");
  cpc->add_option("--h", cp_h, "mesh size (power of two)");
  cpc->add_option("--delta", cp_delta, "gradient regularization (0 = none)");
  cpc->add_option("--tol", cp_tol, "solver tolerance (0 = default)");
  cpc->add_flag("--global", cp_global, "solve over the whole domain (default)");
  cpc->add_option("--window", cp_window,
                  "tag of a window; solve there with unit rim "
                  "(certified upper bound)");
  cpc->add_option("--field", cp_field, "persist the potential field here");
  cpc->add_flag("--delta-sweep", cp_sweep,
                "re-solve at delta = 1e-3, 1e-4, 1e-5 and report the drift");

  std::string sj_file, sj_point;
  double sj_s = 1.0, sj_h = 0.0;
  int sj_g = -1;
  long sj_samples = 64;
  bool sj_witness = false;
  CLI::App* cs = app.add_subcommand(
      "sjohn", "estimate the discrete s-John constant");
  cs->add_option("file", sj_file, "domain file")->required();
  cs->add_option("--s", sj_s, "John exponent s >= 1")->required();
  cs->add_option("--g", sj_g, "grid depth, mesh h = 2^-g");
  cs->add_option("--h", sj_h, "mesh size (power of two)");
  cs->add_option("--samples", sj_samples, "sample budget (default 64)");
  cs->add_option("--point", sj_point,
                 "evaluate at one point 'x,y[,z]' instead of sampling");
  cs->add_flag("--witness", sj_witness, "print a witness path (with --point)");

  std::string ex_config;
  CLI::App* ce = app.add_subcommand(
      "experiment", "run a declared experiment from a config file");
  ce->add_option("--config", ex_config, "config file")->required();

  std::string rd_file, rd_field, rd_out;
  CLI::App* cr = app.add_subcommand(
      "render", "render a 2-D domain (and optional field) as SVG");
  cr->add_option("file", rd_file, "domain file")->required();
  cr->add_option("--field", rd_field, "potential field to overlay");
  cr->add_option("-o,--out", rd_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::string err;

  if (app.got_subcommand(cb)) return run_build(build);

  if (app.got_subcommand(cw)) {
    Domain dom;
    if (!load_domain(wh_file, &dom, &err)) return die(err);
    char *cubes = nullptr, *report = nullptr;
    if (caplab_whitney(dom.d, wh_max_gen, &cubes, &report) != CAPLAB_OK)
      return die_api();
    const bool bad = report[0] != '\0';
    if (bad)
      fputs(report, stderr);
    else
      fputs("verification: ok\n", stderr);
    const bool ok = spill(wh_out, cubes, &err);
    caplab_string_free(cubes);
    caplab_string_free(report);
    if (!ok) return die(err);
    return bad ? 1 : 0;
  }

  if (app.got_subcommand(cc)) {
    std::string text;
    if (!slurp(ct_file, &text, &err)) return die(err);
    char* record = nullptr;
    if (text.rfind("caplab-domain", 0) == 0) {
      if (ct_set.empty())
        return die("domain input needs --set to pick the cube family");
      Domain dom;
      if (caplab_domain_parse(text.c_str(), &dom.d) != CAPLAB_OK)
        return die_api();
      if (caplab_content_tag(dom.d, ct_set.c_str(), ct_q, nullptr, &record) !=
          CAPLAB_OK)
        return die_api();
    } else if (text.rfind("caplab-family", 0) == 0) {
      if (!ct_set.empty())
        return die("--set applies only to domain input");
      if (caplab_content_family(text.c_str(), ct_q, nullptr, &record) !=
          CAPLAB_OK)
        return die_api();
    } else {
      return die("unrecognized input: expected a caplab-domain or "
                 "caplab-family file");
    }
    fputs(record, stdout);
    caplab_string_free(record);
    return 0;
  }

  if (app.got_subcommand(cpc)) {
    if (cp_global && !cp_window.empty())
      return die("--global and --window are mutually exclusive");
    int g = cp_g;
    if (cp_h > 0) {
      if (g >= 0) return die("give either --g or --h, not both");
      if (!h_to_g(cp_h, &g, &err)) return die(err);
    }
    if (g < 0) return die("a mesh is required: --g DEPTH or --h SIZE");
    Domain dom;
    if (!load_domain(cp_file, &dom, &err)) return die(err);
    const char* window = cp_window.empty() ? nullptr : cp_window.c_str();
    char* record = nullptr;
    if (caplab_capacity(dom.d, cp_set.c_str(), window, g, cp_p, cp_delta,
                        cp_tol, cp_field.empty() ? nullptr : cp_field.c_str(),
                        &record) != CAPLAB_OK)
      return die_api();
    fputs(record, stdout);
    caplab_string_free(record);
    if (cp_sweep) {
      for (double dl : {1e-3, 1e-4, 1e-5}) {
        char* rec2 = nullptr;
        if (caplab_capacity(dom.d, cp_set.c_str(), window, g, cp_p, dl,
                            cp_tol, nullptr, &rec2) != CAPLAB_OK)
          return die_api();
        double v = 0.0;
        sscanf(rec2, "value %lf", &v);
        printf("sweep delta %.0e value %.12g\n", dl, v);
        caplab_string_free(rec2);
      }
    }
    return 0;
  }

  if (app.got_subcommand(cs)) {
    int g = sj_g;
    if (sj_h > 0) {
      if (g >= 0) return die("give either --g or --h, not both");
      if (!h_to_g(sj_h, &g, &err)) return die(err);
    }
    if (g < 0) return die("a mesh is required: --g DEPTH or --h SIZE");
    Domain dom;
    if (!load_domain(sj_file, &dom, &err)) return die(err);
    char* record = nullptr;
    if (!sj_point.empty()) {
      if (caplab_sjohn_point(dom.d, sj_s, g, sj_point.c_str(),
                             sj_witness ? 1 : 0, &record) != CAPLAB_OK)
        return die_api();
    } else {
      if (sj_witness) return die("--witness needs --point");
      if (caplab_sjohn(dom.d, sj_s, g, sj_samples, &record) != CAPLAB_OK)
        return die_api();
    }
    fputs(record, stdout);
    caplab_string_free(record);
    return 0;
  }

  if (app.got_subcommand(ce)) {
    std::string text;
    if (!slurp(ex_config, &text, &err)) return die(err);
    char* summary = nullptr;
    char* csv = nullptr;
    const caplab_status rc =
        caplab_experiment_run(text.c_str(), &summary, &csv);
    if (rc == CAPLAB_OK || rc == CAPLAB_EFAIL) {
      fputs(summary, stdout);
      caplab_string_free(summary);
      caplab_string_free(csv);
      return rc == CAPLAB_OK ? 0 : 1;
    }
    return die_api();
  }

  if (app.got_subcommand(cr)) {
    Domain dom;
    if (!load_domain(rd_file, &dom, &err)) return die(err);
    char* svg = nullptr;
    if (caplab_render_svg(dom.d, rd_field.empty() ? nullptr : rd_field.c_str(),
                          &svg) != CAPLAB_OK)
      return die_api();
    const bool ok = spill(rd_out, svg, &err);
    caplab_string_free(svg);
    return ok ? 0 : die(err);
  }

  return 2;  // unreachable: require_subcommand(1)
}

#pragma once
// Experiment orchestration: scaling runs over the benchmark families.
//
//   sharpness       rooms family; capacity slope vs room size r_j,
//                   compared against (n-1)s + 1 - p
//   counterexample  tree family; per-generation content uniformity and
//                   capacity decay, compared against (n-1)s - p - q + 1
//   lowerbound      rooms family; ratio capacity / content^theta with
//                   theta = (s(n-1)+1-p+eps)/q must stay bounded away
//                   from zero along the family
//
// Capacity per row is a windowed upper bound (single window for a rooms
// row, sum of per-leg windows for a tree row; the sum bound needs p <= 2).
// Global solves run as cross-checks for j <= 2 where the cell budget
// allows, and the invariant windowed >= global is enforced.
//
// Configs are line-based "key value" text; reports are CSV plus a summary
// text block. Identical configs produce byte-identical outputs: fixed
// iteration orders, no timestamps, no environment-dependent rows (the
// CAPLAB_THREADS worker cap never changes values, only wall time).

#include <array>
#include <string>
#include <vector>

namespace caplab {

// OLS fit of log(value) against log(scale); max_resid is the largest
// absolute log residual. Needs >= 2 points, all coordinates positive.
bool fit_exponent(const std::vector<std::array<double, 2>>& points,
                  double* slope, double* intercept, double* max_resid,
                  std::string* err);

struct ExperimentRow {
  int j = 0;
  double scale = 0.0;     // r_j (rooms) or 2^-j (tree)
  double capacity = 0.0;  // NaN when the row is excluded
  std::string cap_mode;   // windowed | windowed-sum | global | excluded
  double content = 0.0;   // NaN when not computed
  double ratio = 0.0;     // NaN when not computed (lowerbound only)
  bool excluded = false;
  std::string note;
};

struct ExperimentReport {
  std::string op, family, mode;
  int n = 2, a = 1, jmin = 1, jmax = 1;
  double s = 1.0, p = 2.0, q = 0.0, eps = 0.0;
  bool have_q = false, have_eps = false;

  std::vector<ExperimentRow> rows;  // sorted by j; global rows follow their
                                    // windowed row
  bool have_fit = false;
  double slope = 0.0, intercept = 0.0, max_resid = 0.0;
  double target = 0.0, tol = 0.0;
  double min_ratio = 0.0;      // lowerbound
  double content_ratio = 0.0;  // counterexample: max/min content over rows
  int crosschecks = 0, crosschecks_ok = 0;

  bool pass = false;
  std::string summary;  // deterministic text block
  std::string csv;      // full CSV text (also written to the config path)
};

// Returns 0 when every declared check passes, 1 when a check fails
// (report->summary has the details), 2 on configuration or build errors
// (*err has the message). CSV/SVG files are written when the config names
// them, whether or not the checks pass.
int run_experiment(const std::string& config_text, ExperimentReport* report,
                   std::string* err);

}  // namespace caplab

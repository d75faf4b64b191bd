#include "core/harness.hpp"

#include <doctest.h>

#include <cmath>

using namespace caplab;

TEST_CASE("fit: recovers an exact power law") {
  std::vector<std::array<double, 2>> pts;
  for (int k = 0; k < 5; ++k) {
    const double x = std::exp2(-k);
    pts.push_back({x, 3.0 * std::pow(x, 1.5)});
  }
  double slope = 0, icept = 0, resid = 0;
  std::string err;
  REQUIRE(fit_exponent(pts, &slope, &icept, &resid, &err));
  CHECK(slope == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(icept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(resid <= 1e-12);
}

TEST_CASE("fit: tolerates mild multiplicative noise") {
  std::vector<std::array<double, 2>> pts;
  for (int k = 0; k < 6; ++k) {
    const double x = std::exp2(-k);
    const double wobble = (k % 2 == 0) ? 1.05 : 0.95;
    pts.push_back({x, 2.0 * std::pow(x, 1.5) * wobble});
  }
  double slope = 0, icept = 0, resid = 0;
  std::string err;
  REQUIRE(fit_exponent(pts, &slope, &icept, &resid, &err));
  CHECK(std::abs(slope - 1.5) <= 0.1);
  CHECK(resid <= 0.1);
}

TEST_CASE("fit: degenerate inputs rejected") {
  double slope, icept, resid;
  std::string err;
  CHECK_FALSE(fit_exponent({{1.0, 2.0}}, &slope, &icept, &resid, &err));
  CHECK_FALSE(
      fit_exponent({{1.0, 2.0}, {1.0, 3.0}}, &slope, &icept, &resid, &err));
  CHECK_FALSE(
      fit_exponent({{1.0, 0.0}, {0.5, 1.0}}, &slope, &icept, &resid, &err));
  CHECK_FALSE(
      fit_exponent({{-1.0, 1.0}, {0.5, 1.0}}, &slope, &icept, &resid, &err));
}

TEST_CASE("experiment config: malformed input") {
  ExperimentReport rep;
  std::string err;
  CHECK(run_experiment("op sharpness\nwibble 3\n", &rep, &err) == 2);
  CHECK(err.find("wibble") != std::string::npos);
  err.clear();
  CHECK(run_experiment("op sharpness\njmin\n", &rep, &err) == 2);
  CHECK(err.find("expected 'key value'") != std::string::npos);
  err.clear();
  CHECK(run_experiment("op dance\njmin 1\njmax 2\n", &rep, &err) == 2);
  err.clear();
  CHECK(run_experiment("op sharpness\n", &rep, &err) == 2);  // jmin/jmax
}

TEST_CASE("experiment config: regime boundaries are refused") {
  ExperimentReport rep;
  std::string err;
  // q on the counterexample borderline (n-1)s+1-p is not a target
  const int rc = run_experiment(
      "op counterexample\nfamily tree\nn 2\ns 3\np 2\nq 2\njmin 1\njmax 2\n",
      &rep, &err);
  CHECK(rc == 2);
  CHECK(err.find("open problem") != std::string::npos);

  // eps must stay below p+q-n
  err.clear();
  CHECK(run_experiment("op lowerbound\nfamily rooms\nn 2\ns 1\np 2\nq 0.5\n"
                       "eps 0.7\njmin 1\njmax 2\n",
                       &rep, &err) == 2);
  CHECK(err.find("p+q-n") != std::string::npos);

  // hypothesis q >= s(n-1)+1-p+eps
  err.clear();
  CHECK(run_experiment("op lowerbound\nfamily rooms\nn 2\ns 3\np 2\nq 1.5\n"
                       "eps 0.1\njmin 1\njmax 2\n",
                       &rep, &err) == 2);
  CHECK(err.find("hypothesis") != std::string::npos);

  // the per-leg sum bound needs p <= 2 on the windowed path (p <= n forces
  // n = 3 to reach such a p at all)
  err.clear();
  CHECK(run_experiment("op counterexample\nfamily tree\nn 3\ns 2\np 2.5\n"
                       "q 1.5\njmin 1\njmax 2\n",
                       &rep, &err) == 2);
  CHECK(err.find("solver global") != std::string::npos);
}

TEST_CASE("experiment: flat capacity decay at s = 1") {
  // (n-1)s+1-p = 0: room capacities should barely move across generations
  const char* cfg =
      "op sharpness\nfamily rooms\nn 2\ns 1\na 1\np 2\n"
      "jmin 2\njmax 4\nslope_tol 0.35\n";
  ExperimentReport rep;
  std::string err;
  const int rc = run_experiment(cfg, &rep, &err);
  REQUIRE_MESSAGE(rc != 2, err);
  CHECK(rc == 0);
  REQUIRE(rep.have_fit);
  CHECK(rep.target == 0.0);
  CHECK(std::abs(rep.slope) <= 0.35);
  CHECK(rep.rows.size() >= 3);
  for (const ExperimentRow& r : rep.rows)
    if (!r.excluded && r.cap_mode != "global") CHECK(r.capacity > 0.0);
  CHECK(rep.summary.find("result PASS") != std::string::npos);
  CHECK(rep.csv.rfind("family,n,s,p,q,eps,j,scale,capacity,cap_mode,"
                      "content,ratio",
                      0) == 0);
}

TEST_CASE("experiment: byte-identical reports on repeated runs") {
  const char* cfg =
      "op sharpness\nfamily rooms\nn 2\ns 1\na 1\np 2\n"
      "jmin 2\njmax 4\nslope_tol 0.35\n";
  ExperimentReport a, b;
  std::string err;
  REQUIRE(run_experiment(cfg, &a, &err) == 0);
  REQUIRE(run_experiment(cfg, &b, &err) == 0);
  CHECK(a.summary == b.summary);
  CHECK(a.csv == b.csv);
}

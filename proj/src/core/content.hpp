#pragma once
// Dyadic proxy for the Hausdorff q-content H^q_inf of a finite cube family.
//
// dyadic_content is the exact minimum of sum (diam Q / 2)^q over covers of
// the family by dyadic cubes, each cover cube an ancestor-or-self of a family
// cube.  Bottom-up on the ancestor forest: value(node) = min(cost(node),
// sum of children); family cubes are leaves — for q <= n subdividing a fully
// covered cube never decreases cost.  Cubes in different orthants never share
// a dyadic ancestor, so the forest has one root per touched orthant.
//
// Circumscribed balls turn a dyadic cover into a ball cover, hence
// H^q_inf <= dyadic_value (c_lo = 1).  Conversely any ball splits into
// boundedly many dyadic cubes of comparable size, giving
// dyadic_value <= c_hi * H^q_inf with the conservative c_hi below.

#include <string>
#include <vector>

#include "domain.hpp"
#include "whitney.hpp"

namespace caplab {

struct CubeFamily {
  int dim = 2;
  std::vector<DyadicCube> cubes;  // pairwise disjoint interiors
};

struct ContentResult {
  double q = 0.0;
  double dyadic_value = 0.0;  // optimal restricted dyadic cover cost
  double ball_upper = 0.0;    // explicit ball cover cost (0 until computed)
  double c_lo = 1.0;          // H^q_inf <= c_lo * dyadic_value
  double c_hi = 0.0;          // dyadic_value <= c_hi * H^q_inf
};

// exact test: no duplicate cube and no cube nested inside another
bool family_disjoint(const CubeFamily& fam, std::string* why);

// fills q, dyadic_value, c_lo, c_hi; leaves ball_upper = 0
bool dyadic_content(const CubeFamily& fam, double q, ContentResult* out,
                    std::string* err);

// greedy circumscribed-ball cover: one ball per cube, then repeatedly apply
// the pair merge (smallest enclosing ball of the merged groups' corners)
// that lowers total cost the most; local optimum, always >= H^q_inf
bool ball_cover_upper(const CubeFamily& fam, double q, double* out,
                      std::string* err);

// subdivide the boxes under `tag` into maximal aligned dyadic cubes (exact
// set equality with the tagged union)
bool family_from_tag(const DomainSpec& spec, const std::string& tag,
                     CubeFamily* out, std::string* err);

// text format: "caplab-family v1" / "dim D" / lines "cube GEN LAT..";
std::string emit_family(const CubeFamily& fam);
bool parse_family(const std::string& text, CubeFamily* out, std::string* err);

}  // namespace caplab

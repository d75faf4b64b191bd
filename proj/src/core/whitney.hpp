#pragma once
// Whitney decomposition of a box-union domain into dyadic cubes.
//
// Selection rule: a dyadic cube Q (side 2^-gen) is kept iff it is maximal
// with  dist(Q, boundary) >= diam(Q)  (exact integer test  d2 >= n*side^2).
// Any kept cube then satisfies the sandwich
//     diam(Q) <= dist(Q, dOmega) <= 4*diam(Q):
// the lower bound is the rule itself; for the upper bound, the parent P
// failed, so either P met the boundary (dist(Q) <= diam(P) = 2 diam(Q)) or
// dist(P) < diam(P), and dist(Q) <= dist(P) + diam(P) < 4 diam(Q).
//
// The recursion is truncated at max_gen; cells still undecided there are
// recorded as `residual` so that the exact volume identity
//     sum |Q| + sum vol(residual cell ∩ Omega) == vol(Omega)
// holds at all truncation depths.
#include "core/boundary.hpp"
#include "core/domain.hpp"

#include <string>
#include <vector>

namespace caplab {

struct DyadicCube {
  int gen = 0;  // side 2^-gen
  Coord lat{};  // corner = lat * 2^-gen; axes beyond dim stay 0
};
using WhitneyCube = DyadicCube;

inline bool cube_less(const DyadicCube& a, const DyadicCube& b) {
  if (a.gen != b.gen) return a.gen < b.gen;
  return a.lat < b.lat;
}
inline bool cube_eq(const DyadicCube& a, const DyadicCube& b) {
  return a.gen == b.gen && a.lat == b.lat;
}

struct WhitneyDecomposition {
  int dim = 2;
  int max_gen = 0;
  std::vector<DyadicCube> cubes;
  std::vector<DyadicCube> residual;  // undecided cells at max_gen
  size_t central = 0;                // index into cubes
  bool truncated = false;            // residual nonempty
};

// max_gen < 0 picks a default depth (spec.scale + 4, at least 6).
bool whitney_decompose(const DomainSpec& spec, int max_gen,
                       WhitneyDecomposition* out, std::string* err);

// Index of the cube whose closed extent contains x (given at scale xscale).
// Ties on shared faces break to the smallest (gen, lattice) cube.
bool whitney_central_cube(const WhitneyDecomposition& w, const Coord& x,
                          int xscale, size_t* idx);

// Exact re-verification, independent of how the decomposition was produced:
// pairwise disjoint interiors, the volume identity above, the sandwich
// inequality per cube, and x0 in the central cube. Empty list == pass.
std::vector<std::string> whitney_verify(const WhitneyDecomposition& w,
                                        const DomainSpec& spec);

// Largest generation difference over pairs of cubes with touching closures.
int whitney_max_neighbor_gap(const WhitneyDecomposition& w);

// Cube corner box lifted to `scale` (>= cube.gen).
IBox cube_box_at_scale(const DyadicCube& c, int dim, int scale);

// Text dump: one "cube GEN LAT..." line per cube, residual cells after.
std::string emit_whitney(const WhitneyDecomposition& w);

}  // namespace caplab

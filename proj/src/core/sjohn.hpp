#pragma once
// Discrete s-John condition on the voxel grid.
//
// A lattice path x = v0, v1, ... , vM = x0 (face neighbors, step length h)
// satisfies the condition at constant C when every visited cell v at
// along-path length L = k*h obeys L^s <= C * d(v), d = exact center-to-
// boundary distance.  Feasibility for fixed C is decided exactly by a
// breadth-first search in path length: the deadline L <= (C d(v))^{1/s} is a
// static per-cell bound, and reaching a cell earlier only loosens every
// constraint along any suffix, so the first (shortest) arrival decides.

#include <string>
#include <vector>

#include "domain.hpp"
#include "grid.hpp"

namespace caplab {

struct JohnQuery {
  const VoxelGrid* grid = nullptr;
  const DistanceField* dist = nullptr;
  i64 x = 0;   // start cell, raw index
  i64 x0 = 0;  // center cell, raw index
  double s = 1.0;
  double C = 1.0;
};

// witness (when non-null and feasible) = cell index list from x to x0
bool john_feasible(const JohnQuery& q, std::vector<i64>* witness = nullptr);

// minimal feasible C within relative tol (default 1e-3 when tol <= 0),
// geometric bisection between a path-length lower seed and a doubled upper
// seed; x unreachable from x0 -> error
bool john_constant_point(const VoxelGrid& grid, const DistanceField& dist,
                         i64 x, i64 x0, double s, double tol, double* out,
                         std::string* err);

struct JohnEstimate {
  double C = 0.0;
  double h = 0.0;
  i64 argmax_cell = -1;
  size_t samples = 0;
};

// max of john_constant_point over a deterministic sample set: every cell of
// locally minimal distance inside each tagged set, plus a stratified lattice
// sample of size <= sample_budget.  Evaluated as one bisection over C on the
// predicate "all samples feasible", one linear latest-arrival sweep per
// probe, so cost does not grow with the sample count.
bool john_constant(const DomainSpec& spec, double s, int g,
                   size_t sample_budget, JohnEstimate* out, std::string* err);

// occupied cell whose center is nearest the domain center (exact integer
// comparison; ties -> lowest index)
bool center_cell(const DomainSpec& spec, const VoxelGrid& grid, i64* out,
                 std::string* err);

}  // namespace caplab

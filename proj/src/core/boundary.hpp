#pragma once
// Exact representation of the boundary of a box-union domain as a set of
// axis-degenerate sub-rectangles ("subcells") of box faces, at scale m+1.
//
// Construction: each box face is refined by the breakpoints of every box
// whose closure meets it; a subcell is kept iff its midpoint is NOT interior
// to the union. The closure of the kept subcells is exactly the topological
// boundary of the open union, so point/box distances measured against them
// (as exact integer squared distances) equal dist(. , boundary).
//
// Why midpoints decide whole subcells: no box face crosses a subcell's
// relative interior, so the covering pattern of the union is uniform there.
// Why the closure covers all of the boundary: a boundary point whose nearby
// subcells were all interior-classified would need exterior points
// arbitrarily close, but the exterior is open and everything near the point
// except a lower-dimensional edge set lies in the domain.
#include "core/domain.hpp"

#include <vector>

namespace caplab {

struct BoundaryGeometry {
  int dim = 2;
  int scale = 0;  // = spec.scale + 1; subcell coordinates live here
  // Subcells as IBoxes with lo[axis]==hi[axis] on their degenerate axis.
  std::vector<IBox> cells;

  // Internal AABB tree over `cells` for nearest-distance queries.
  struct Node {
    Coord lo{}, hi{};
    int left = -1, right = -1;   // children, or
    int begin = 0, end = 0;      // leaf range into `order`
  };
  std::vector<Node> nodes;
  std::vector<int> order;

  // Squared distance from a point given at scale qscale to the nearest
  // subcell, as an exact integer in units of 2^-2c, c = max(qscale, scale):
  // whichever side sits at the coarser scale is lifted, so any qscale works.
  i128 dist2_point_units(const Coord& x, int qscale) const;
  // Same for a closed box given at scale qscale.
  i128 dist2_box_units(const IBox& b, int qscale) const;

  // real distance; always normalized correctly regardless of qscale
  double dist_point(const Coord& x, int qscale) const;
};

BoundaryGeometry build_boundary(const DomainSpec& spec);

}  // namespace caplab

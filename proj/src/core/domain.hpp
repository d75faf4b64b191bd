#pragma once
// Bounded domains as finite unions of axis-aligned boxes with dyadic corner
// coordinates, all held as integers at one shared scale 2^-m. The open set
// Omega is the interior of the union of the closed boxes.
//
// Everything here is exact: membership, volume, adjacency and connectivity
// are integer decisions, never floating-point ones.
#include "core/dyadic.hpp"

#include <array>
#include <string>
#include <vector>

namespace caplab {

constexpr int kMaxDim = 3;
using Coord = std::array<i64, kMaxDim>;  // axes beyond `dim` stay 0

struct IBox {
  Coord lo{};
  Coord hi{};
};

struct TaggedSet {
  std::string name;
  std::vector<IBox> boxes;
};

struct DomainSpec {
  int dim = 2;
  int scale = 0;  // coordinates are multiples of 2^-scale
  std::vector<IBox> boxes;
  Coord center{};  // John center x0, at `scale`
  std::vector<TaggedSet> tags;

  const TaggedSet* find_tag(const std::string& name) const;
};

bool box_valid(const IBox& b, int dim);
i128 box_volume_units(const IBox& b, int dim);  // in units of 2^-(dim*scale)
bool boxes_interior_overlap(const IBox& a, const IBox& b, int dim);
// True when int(closure(a) U closure(b)) is connected: overlapping volume, or
// face contact of positive (dim-1)-measure. Corner/edge contact doesn't count.
bool boxes_union_connected(const IBox& a, const IBox& b, int dim);

// Open-union membership of the point x*2^-xscale (xscale >= 0, any relation
// to spec.scale). Decided by the orthant probe: x is interior iff for every
// sign pattern sigma there is a box covering the sigma-sided neighborhood,
// i.e. lo<=x<hi on +axes and lo<x<=hi on -axes. Exact.
bool contains_point(const DomainSpec& spec, const Coord& x, int xscale);
// Membership in the closed union (any box, closed comparisons).
bool closed_contains_point(const DomainSpec& spec, const Coord& x, int xscale);

// Exact volume of the union, in units of 2^-(dim*scale).
i128 union_volume_units(const std::vector<IBox>& boxes, int dim);
i128 union_volume_units(const DomainSpec& spec);

// Exact volume of (box ∩ union of boxes), same units.
i128 clipped_volume_units(const IBox& clip, const std::vector<IBox>& boxes,
                          int dim);

// Connectivity of the open union via the box contact graph. int(U) is
// connected iff the graph with edges boxes_union_connected is connected
// (any interior path crossing between boxes must cross a positive-area
// shared face, and each box interior plus each open shared face is connected).
bool spec_connected(const DomainSpec& spec);

// Structural validation: dim/scale ranges, box validity, center interior,
// tags inside the closed union, connectivity. Returns false + message.
bool validate_spec(const DomainSpec& spec, std::string* err);

// Lift coordinates to a finer scale (newscale >= scale).
DomainSpec rescale_spec(const DomainSpec& spec, int newscale);

void spec_bbox(const DomainSpec& spec, Coord* lo, Coord* hi);

// Text format (round-trips exactly):
//   caplab-domain v1
//   dim 2
//   scale 4
//   center 8 8
//   box 0 0 16 16
//   tagbox E1 0 16 4 20
// '#' starts a comment; order of boxes/tagboxes is preserved.
std::string emit_domain(const DomainSpec& spec);
bool parse_domain(const std::string& text, DomainSpec* out, std::string* err);

}  // namespace caplab

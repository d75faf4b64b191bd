#pragma once
// Builders for the benchmark domain families.
//
//  * rooms_and_corridors: a unit cube with J cube rooms of edge r_j = 2^-aj
//    hanging off its top face, each reached through a neck of cross-section
//    width r_j^s and length r_j. Rooms tagged E1..EJ, necks C1..CJ.
//  * branching_tree: a unit cube growing room-and-passage "legs" from free
//    corners, step j legs having passage length 2^-j and width 2^-js-1.
//    Step-j rooms tagged Ej, passages Cj.
//  * room_passage_replacement: carve every non-central Whitney cube of a base
//    domain into an outer shell, an inner room of edge side/4, and a passage
//    of width (side/4)^s joining them.
//
// Every constructor certifies its own geometry: exact pairwise
// interior-disjointness of all boxes, and (for the tree) that the only
// positive-area face contacts are the intended parent-passage-room chains.
#include "core/domain.hpp"
#include "core/whitney.hpp"

#include <string>
#include <vector>

namespace caplab {

struct RoomsParams {
  int n = 2;
  Dyadic s{1, 0};  // s >= 1 dyadic; a*s must be integral
  int a = 1;       // r_j = 2^-aj
  int J = 1;
};

bool rooms_and_corridors(const RoomsParams& p, DomainSpec* out,
                         std::string* err);

enum class TreeMode { kFull, kThinned };

struct TreeParams {
  int n = 2;
  int s = 1;       // integral
  double q = 1.0;  // thinned mode: legs per step k_j = ceil(2^(q*j))
  int J = 1;
  TreeMode mode = TreeMode::kFull;
};

struct TreeLeg {
  int step = 0;
  int parent = -1;  // index into legs; -1 = the unit cube
  IBox passage{};
  IBox room{};
  std::array<int, 3> sigma{0, 0, 0};  // outward orthant at the attach corner
};

struct TreeStructure {
  std::vector<TreeLeg> legs;
};

// st may be null when the leg graph is not needed.
bool branching_tree(const TreeParams& p, DomainSpec* out, TreeStructure* st,
                    std::string* err);

bool room_passage_replacement(const DomainSpec& base, const Dyadic& s,
                              const WhitneyDecomposition& w, DomainSpec* out,
                              std::string* err);

}  // namespace caplab

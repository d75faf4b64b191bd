#include "core/constructions.hpp"

#include <doctest.h>

#include <cmath>

using namespace caplab;

namespace {

double union_volume(const DomainSpec& s) {
  return double(i64(union_volume_units(s))) *
         std::ldexp(1.0, -s.dim * s.scale);
}

}  // namespace

TEST_CASE("rooms: single room, canonical packing") {
  RoomsParams p;
  p.n = 2;
  p.s = {1, 0};
  p.a = 1;
  p.J = 1;
  DomainSpec d;
  std::string err;
  REQUIRE(rooms_and_corridors(p, &d, &err));
  CHECK(d.scale == 2);
  CHECK(d.boxes.size() == 3);  // core, corridor, room
  REQUIRE(d.find_tag("E1"));
  REQUIRE(d.find_tag("C1"));
  const IBox& room = d.find_tag("E1")->boxes[0];
  const IBox& corr = d.find_tag("C1")->boxes[0];
  const i64 one = pow2i(d.scale);
  // room edge r_1 = 1/2, stacked above the corridor of length r_1
  CHECK(room.hi[0] - room.lo[0] == one / 2);
  CHECK(room.lo[1] == one + one / 2);
  CHECK(room.hi[1] == one + one);
  CHECK(corr.lo[1] == one);
  CHECK(corr.hi[1] == one + one / 2);
  // corridor sits inside the room's x-extent (s = 1: same width)
  CHECK(corr.lo[0] >= room.lo[0]);
  CHECK(corr.hi[0] <= room.hi[0]);
}

TEST_CASE("rooms: fallback packing fills the face exactly at J = 2") {
  RoomsParams p;
  p.n = 2;
  p.s = {1, 0};
  p.a = 1;
  p.J = 2;
  DomainSpec d;
  std::string err;
  REQUIRE(rooms_and_corridors(p, &d, &err));
  // volume = 1 + sum_j (r_j^2 + r_j^{1+s}) with r_j = 2^-j, s = 1
  CHECK(union_volume(d) == doctest::Approx(1.625).epsilon(1e-15));
  // both rooms stay inside the unit face span [0, 1]
  const i64 one = pow2i(d.scale);
  for (const char* t : {"E1", "E2"}) {
    const IBox& b = d.find_tag(t)->boxes[0];
    CHECK(b.lo[0] >= 0);
    CHECK(b.hi[0] <= one);
  }
}

TEST_CASE("rooms: elongated corridors, s = 2") {
  RoomsParams p;
  p.n = 2;
  p.s = {2, 0};
  p.a = 1;
  p.J = 3;
  DomainSpec d;
  std::string err;
  REQUIRE(rooms_and_corridors(p, &d, &err));
  for (int j = 1; j <= 3; ++j) {
    char name[8];
    snprintf(name, sizeof name, "C%d", j);
    const IBox& c = d.find_tag(name)->boxes[0];
    char rname[8];
    snprintf(rname, sizeof rname, "E%d", j);
    const IBox& r = d.find_tag(rname)->boxes[0];
    // width r_j^s = 2^-2j, length r_j = 2^-j, exact at scale d.scale
    CHECK(c.hi[0] - c.lo[0] == pow2i(d.scale - 2 * j));
    CHECK(c.hi[1] - c.lo[1] == pow2i(d.scale - j));
    CHECK(r.hi[0] - r.lo[0] == pow2i(d.scale - j));
  }
}

TEST_CASE("rooms: fractional s needs integral a*s") {
  RoomsParams p;
  p.n = 2;
  p.s = {3, 1};  // 1.5
  p.a = 1;
  p.J = 2;
  DomainSpec d;
  std::string err;
  CHECK_FALSE(rooms_and_corridors(p, &d, &err));
  CHECK(err.find("a*s") != std::string::npos);
  p.a = 2;  // a*s = 3
  err.clear();
  CHECK(rooms_and_corridors(p, &d, &err));
}

TEST_CASE("rooms: precision budget reported with a feasible J") {
  RoomsParams p;
  p.n = 2;
  p.s = {4, 0};
  p.a = 2;
  p.J = 12;  // a*s*J + 1 = 97 >> 62
  DomainSpec d;
  std::string err;
  CHECK_FALSE(rooms_and_corridors(p, &d, &err));
  CHECK(err.find("precision") != std::string::npos);
  CHECK(err.find("J =") != std::string::npos);
}

TEST_CASE("rooms: s below 1 rejected") {
  RoomsParams p;
  p.s = {1, 1};  // 0.5
  DomainSpec d;
  std::string err;
  CHECK_FALSE(rooms_and_corridors(p, &d, &err));
}

TEST_CASE("tree: one full step in the plane") {
  TreeParams p;
  p.n = 2;
  p.s = 1;
  p.J = 1;
  DomainSpec d;
  TreeStructure st;
  std::string err;
  REQUIRE(branching_tree(p, &d, &st, &err));
  CHECK(d.scale == 3);
  CHECK(st.legs.size() == 4);  // one leg per unit-cube corner
  CHECK(d.boxes.size() == 1 + 2 * 4);
  REQUIRE(d.find_tag("E1"));
  CHECK(d.find_tag("E1")->boxes.size() == 4);
  // volume = 1 + 4 * (room 1/4 + passage 2^-1 * 2^-2)
  CHECK(union_volume(d) == doctest::Approx(2.5).epsilon(1e-15));
  for (const TreeLeg& L : st.legs) {
    CHECK(L.step == 1);
    CHECK(L.parent == -1);
    // passage length 2^-1, width 2^-s-1 = 2^-2
    CHECK(L.passage.hi[0] - L.passage.lo[0] == pow2i(d.scale - 1));
    CHECK(L.passage.hi[1] - L.passage.lo[1] == pow2i(d.scale - 2));
    // room is a square of edge 2^-1
    CHECK(L.room.hi[0] - L.room.lo[0] == pow2i(d.scale - 1));
    CHECK(L.room.hi[1] - L.room.lo[1] == pow2i(d.scale - 1));
  }
}

TEST_CASE("tree: step counts follow 2^n (2^n - 1)^(j-1)") {
  TreeParams p;
  p.n = 2;
  p.s = 1;
  p.J = 3;
  DomainSpec d;
  TreeStructure st;
  std::string err;
  REQUIRE(branching_tree(p, &d, &st, &err));
  int count[4] = {0, 0, 0, 0};
  for (const TreeLeg& L : st.legs) ++count[L.step];
  CHECK(count[1] == 4);
  CHECK(count[2] == 12);
  CHECK(count[3] == 36);
  // every non-root leg hangs off a previous-step leg
  for (const TreeLeg& L : st.legs)
    if (L.step > 1) CHECK(st.legs[size_t(L.parent)].step == L.step - 1);
}

TEST_CASE("tree: 3-D structure") {
  TreeParams p;
  p.n = 3;
  p.s = 2;
  p.J = 2;
  DomainSpec d;
  TreeStructure st;
  std::string err;
  REQUIRE(branching_tree(p, &d, &st, &err));
  int c1 = 0, c2 = 0;
  for (const TreeLeg& L : st.legs) (L.step == 1 ? c1 : c2)++;
  CHECK(c1 == 8);
  CHECK(c2 == 8 * 7);
}

TEST_CASE("tree: thinned mode keeps ceil(2^(qj)) legs, deterministically") {
  TreeParams p;
  p.n = 2;
  p.s = 2;
  p.q = 1.0;
  p.J = 3;
  p.mode = TreeMode::kThinned;
  DomainSpec d;
  TreeStructure st;
  std::string err;
  REQUIRE(branching_tree(p, &d, &st, &err));
  int count[4] = {0, 0, 0, 0};
  for (const TreeLeg& L : st.legs) ++count[L.step];
  CHECK(count[1] == 2);
  CHECK(count[2] == 4);
  CHECK(count[3] == 8);
  DomainSpec d2;
  REQUIRE(branching_tree(p, &d2, nullptr, &err));
  CHECK(emit_domain(d) == emit_domain(d2));
}

TEST_CASE("tree: thinned mode rejects q beyond the branching rate") {
  TreeParams p;
  p.n = 2;
  p.s = 1;
  p.q = 2.0;  // needs 16 legs at step 2, only 12 slots
  p.J = 2;
  p.mode = TreeMode::kThinned;
  DomainSpec d;
  std::string err;
  CHECK_FALSE(branching_tree(p, &d, nullptr, &err));
  CHECK(err.find("slots") != std::string::npos);
}

TEST_CASE("tree: precision budget") {
  TreeParams p;
  p.n = 2;
  p.s = 7;
  p.J = 9;  // J*s + 2 = 65 > 62
  DomainSpec d;
  std::string err;
  CHECK_FALSE(branching_tree(p, &d, nullptr, &err));
  CHECK(err.find("precision") != std::string::npos);
}

TEST_CASE("replacement: carves every non-central Whitney cube") {
  DomainSpec base;
  base.dim = 2;
  base.scale = 1;
  IBox b;
  b.lo = {0, 0, 0};
  b.hi = {2, 2, 0};
  base.boxes = {b};
  base.center = {1, 1, 0};
  WhitneyDecomposition w;
  std::string err;
  REQUIRE(whitney_decompose(base, 4, &w, &err));
  DomainSpec out;
  REQUIRE(room_passage_replacement(base, {1, 0}, w, &out, &err));
  // carving removes volume but keeps the domain connected
  CHECK(union_volume(out) < union_volume(rescale_spec(base, out.scale)));
  CHECK(spec_connected(out));
  // rooms exist at the generations the decomposition produced
  bool any_room = false;
  for (const TaggedSet& t : out.tags)
    if (t.name[0] == 'E') any_room = true;
  CHECK(any_room);
}

TEST_CASE("replacement: s below 1 rejected") {
  DomainSpec base;
  base.dim = 2;
  base.scale = 1;
  IBox b;
  b.lo = {0, 0, 0};
  b.hi = {2, 2, 0};
  base.boxes = {b};
  base.center = {1, 1, 0};
  WhitneyDecomposition w;
  std::string err;
  REQUIRE(whitney_decompose(base, 3, &w, &err));
  DomainSpec out;
  CHECK_FALSE(room_passage_replacement(base, {1, 1}, w, &out, &err));
  CHECK(err.find("s >= 1") != std::string::npos);
}

TEST_CASE("builders are deterministic") {
  RoomsParams p;
  p.n = 2;
  p.s = {2, 0};
  p.a = 1;
  p.J = 4;
  DomainSpec a, b;
  std::string err;
  REQUIRE(rooms_and_corridors(p, &a, &err));
  REQUIRE(rooms_and_corridors(p, &b, &err));
  CHECK(emit_domain(a) == emit_domain(b));
}

#include "core/domain.hpp"

#include <doctest.h>

using namespace caplab;

namespace {

IBox mkbox2(i64 x0, i64 y0, i64 x1, i64 y1) {
  IBox b;
  b.lo = {x0, y0, 0};
  b.hi = {x1, y1, 0};
  return b;
}

DomainSpec unit_square(int scale = 2) {
  DomainSpec s;
  s.dim = 2;
  s.scale = scale;
  const i64 one = pow2i(scale);
  s.boxes.push_back(mkbox2(0, 0, one, one));
  s.center = {one / 2, one / 2, 0};
  return s;
}

}  // namespace

TEST_CASE("dyadic parsing") {
  Dyadic d;
  CHECK(parse_dyadic("1.5", &d));
  CHECK(d.num == 3);
  CHECK(d.scale == 1);
  CHECK(parse_dyadic("2", &d));
  CHECK(d.num == 2);
  CHECK(d.scale == 0);
  CHECK(parse_dyadic("-0.375", &d));
  CHECK(d.num == -3);
  CHECK(d.scale == 3);
  CHECK_FALSE(parse_dyadic("0.1", &d));  // not dyadic
  CHECK_FALSE(parse_dyadic("", &d));
  CHECK(dyadic_from_double(2.5, 30, &d));
  CHECK(d.num == 5);
  CHECK(d.scale == 1);
}

TEST_CASE("containment: interior, boundary, shared face") {
  DomainSpec s = unit_square(2);
  CHECK(contains_point(s, {2, 2, 0}, 2));        // (0.5,0.5)
  CHECK_FALSE(contains_point(s, {0, 2, 0}, 2));  // (0,0.5) boundary

  // two abutting boxes: interior of the union includes the shared open face
  DomainSpec t;
  t.dim = 2;
  t.scale = 1;
  t.boxes.push_back(mkbox2(0, 0, 2, 2));
  t.boxes.push_back(mkbox2(2, 0, 4, 2));
  t.center = {1, 1, 0};
  CHECK(contains_point(t, {2, 1, 0}, 1));        // (1,0.5) on shared face
  CHECK_FALSE(contains_point(t, {2, 2, 0}, 1));  // (1,1) top edge point
  CHECK_FALSE(contains_point(t, {4, 1, 0}, 1));  // (2,0.5) outer boundary
  CHECK(closed_contains_point(t, {4, 1, 0}, 1));
}

TEST_CASE("containment at mismatched query scale") {
  DomainSpec s = unit_square(0);
  CHECK(contains_point(s, {1, 1, 0}, 4));  // (1/16,1/16)
  CHECK_FALSE(contains_point(s, {0, 8, 0}, 4));
  CHECK(contains_point(s, {31, 31, 0}, 5));
  CHECK_FALSE(contains_point(s, {32, 16, 0}, 5));
}

TEST_CASE("exact union volume with overlaps") {
  std::vector<IBox> boxes;
  boxes.push_back(mkbox2(0, 0, 4, 4));
  CHECK(union_volume_units(boxes, 2) == 16);
  boxes.push_back(mkbox2(2, 2, 6, 6));  // overlaps by 2x2
  CHECK(union_volume_units(boxes, 2) == 28);
  boxes.push_back(mkbox2(4, 0, 6, 2));  // disjoint corner-touching piece
  CHECK(union_volume_units(boxes, 2) == 32);

  // 3D: two overlapping slabs
  IBox a, b;
  a.lo = {0, 0, 0};
  a.hi = {4, 4, 2};
  b.lo = {0, 0, 1};
  b.hi = {4, 4, 3};
  CHECK(union_volume_units({a, b}, 3) == 4 * 4 * 3);
}

TEST_CASE("clipped volume and tag validation") {
  DomainSpec s = unit_square(2);
  IBox clip = mkbox2(2, 2, 6, 6);
  CHECK(clipped_volume_units(clip, s.boxes, 2) == 4);  // only [2,4]^2 inside

  s.tags.push_back({"E1", {mkbox2(1, 1, 2, 2)}});
  std::string err;
  CHECK(validate_spec(s, &err));
  s.tags.push_back({"BAD", {mkbox2(3, 3, 5, 5)}});  // leaves the square
  CHECK_FALSE(validate_spec(s, &err));
  CHECK(err.find("BAD") != std::string::npos);
}

TEST_CASE("box contact classification") {
  IBox a = mkbox2(0, 0, 2, 2);
  CHECK(boxes_union_connected(a, mkbox2(2, 0, 4, 2), 2));   // full face
  CHECK(boxes_union_connected(a, mkbox2(2, 1, 4, 3), 2));   // partial face
  CHECK(boxes_union_connected(a, mkbox2(1, 1, 3, 3), 2));   // overlap
  CHECK_FALSE(boxes_union_connected(a, mkbox2(2, 2, 4, 4), 2));  // corner only
  CHECK_FALSE(boxes_union_connected(a, mkbox2(3, 0, 5, 2), 2));  // gap
}

TEST_CASE("connectivity of the box union") {
  DomainSpec s;
  s.dim = 2;
  s.scale = 1;
  s.boxes.push_back(mkbox2(0, 0, 2, 2));
  s.boxes.push_back(mkbox2(2, 0, 4, 2));
  s.center = {1, 1, 0};
  CHECK(spec_connected(s));
  s.boxes.push_back(mkbox2(6, 0, 8, 2));  // island
  CHECK_FALSE(spec_connected(s));
  std::string err;
  CHECK_FALSE(validate_spec(s, &err));
}

TEST_CASE("domain text round-trip") {
  DomainSpec s = unit_square(3);
  s.tags.push_back({"E1", {mkbox2(0, 0, 2, 2)}});
  s.tags.push_back({"C1", {mkbox2(2, 2, 4, 4), mkbox2(4, 4, 6, 6)}});
  const std::string text = emit_domain(s);
  DomainSpec r;
  std::string err;
  REQUIRE(parse_domain(text, &r, &err));
  CHECK(r.dim == s.dim);
  CHECK(r.scale == s.scale);
  CHECK(r.center == s.center);
  REQUIRE(r.boxes.size() == s.boxes.size());
  CHECK(r.boxes[0].lo == s.boxes[0].lo);
  REQUIRE(r.tags.size() == 2);
  CHECK(r.tags[1].boxes.size() == 2);
  CHECK(emit_domain(r) == text);  // emit is stable under round-trip

  // comments and rejection paths
  DomainSpec bad;
  CHECK_FALSE(parse_domain("dim 2\n", &bad, &err));
  CHECK_FALSE(parse_domain("caplab-domain v1\ndim 4\n", &bad, &err));
  const std::string commented =
      "caplab-domain v1  # header\ndim 2\nscale 1\ncenter 1 1\nbox 0 0 2 2\n";
  CHECK(parse_domain(commented, &bad, &err));
}

TEST_CASE("rescale lifts coordinates exactly") {
  DomainSpec s = unit_square(2);
  DomainSpec r = rescale_spec(s, 5);
  CHECK(r.scale == 5);
  CHECK(r.boxes[0].hi[0] == 32);
  CHECK(r.center[0] == 16);
  CHECK(union_volume_units(r) == i128(1) << (2 * 5));
}

#include <doctest.h>

#include <random>

#include "frictionlab/geometry.hpp"

using namespace frictionlab;
using namespace frictionlab::geometry;

namespace {

Vec pt1(Rational x) { return vec_of({x}); }
Vec pt2(Rational x, Rational y) { return vec_of({x, y}); }

Box box1(Rational lo, Rational hi) { return Box{pt1(lo), pt1(hi)}; }

Polytope seg(Rational lo, Rational hi) { return hull(1, {pt1(lo), pt1(hi)}); }

}  // namespace

TEST_CASE("hull removes interior and duplicate points") {
  const auto p = hull(1, {pt1(0), pt1(1), pt1(Rational(1, 2))});
  REQUIRE(p.vertices.size() == 2);
  CHECK(p.vertices[0] == pt1(0));
  CHECK(p.vertices[1] == pt1(1));

  const auto q = hull(2, {pt2(0, 0), pt2(1, 0), pt2(0, 1), pt2(Rational(1, 4), Rational(1, 4))});
  CHECK(q.vertices.size() == 3);

  const auto binom = hull(1, {pt1(5), pt1(6), pt1(1), pt1(2)});
  REQUIRE(binom.vertices.size() == 2);
  CHECK(binom.vertices[0] == pt1(1));
  CHECK(binom.vertices[1] == pt1(6));
}

TEST_CASE("facets of a segment, square, and point") {
  const auto hs = facets(seg(1, 3));
  REQUIRE(hs.size() == 2);

  const auto square = hull(2, {pt2(0, 0), pt2(1, 0), pt2(0, 1), pt2(1, 1)});
  CHECK(facets(square).size() == 4);

  const auto point = Polytope{2, {pt2(Rational(1, 3), 5)}};
  CHECK(facets(point).size() == 4);  // two equality pairs
}

TEST_CASE("v-h-v round trip") {
  const auto square = hull(2, {pt2(0, 0), pt2(2, 0), pt2(0, 2), pt2(2, 2), pt2(1, 1)});
  const auto back = vertices_from_halfspaces(2, facets(square));
  CHECK(Polytope{2, back} == square);
}

TEST_CASE("intersection with boxes") {
  const auto p = intersect(seg(Rational(7, 2), 5), box1(2, 4));
  REQUIRE(p.vertices.size() == 2);
  CHECK(p.vertices[0] == pt1(Rational(7, 2)));
  CHECK(p.vertices[1] == pt1(4));

  CHECK(intersect(seg(Rational(7, 2), 4), box1(1, 3)).empty());

  const auto inside = intersect(seg(Rational(5, 2), 3), box1(2, 4));
  CHECK(inside == seg(Rational(5, 2), 3));
}

TEST_CASE("separating functional") {
  const auto sep = separating_functional(seg(1, 3), seg(Rational(7, 2), 4), 1);
  REQUIRE(sep.has_value());
  CHECK(sep->functional(0) == 2);
  CHECK(sep->q_min - sep->p_max >= 1);

  CHECK(!separating_functional(seg(1, 3), seg(1, 3), 1).has_value());

  const auto axis = separating_functional(Polytope{2, {pt2(0, 0)}}, Polytope{2, {pt2(1, 0)}}, 1);
  REQUIRE(axis.has_value());
  CHECK(axis->functional(0) == 1);
  CHECK(axis->functional(1) == 0);
}

TEST_CASE("relative interior point") {
  CHECK(relative_interior_point(seg(1, 3)) == pt1(2));
  CHECK(relative_interior_point(Polytope{1, {pt1(7)}}) == pt1(7));
  const auto tri = hull(2, {pt2(0, 0), pt2(1, 0), pt2(0, 1)});
  CHECK(relative_interior_point(tri) == pt2(Rational(1, 3), Rational(1, 3)));
}

TEST_CASE("caratheodory weights") {
  const auto mid = caratheodory_weights(pt1(2), seg(1, 3));
  REQUIRE(mid.has_value());
  Rational total = 0;
  Vec recon = Vec::Zero(1);
  for (const auto& [v, w] : *mid) {
    CHECK(w > 0);
    total += w;
    recon += w * v;
  }
  CHECK(total == 1);
  CHECK(recon == pt1(2));

  const auto vertex = caratheodory_weights(pt1(3), seg(1, 3));
  REQUIRE(vertex.has_value());
  REQUIRE(vertex->size() == 1);
  CHECK((*vertex)[0].second == 1);

  const auto skew = caratheodory_weights(pt1(4), seg(1, 6));
  REQUIRE(skew.has_value());
  REQUIRE(skew->size() == 2);
  CHECK((*skew)[0].first == pt1(1));
  CHECK((*skew)[0].second == Rational(2, 5));
  CHECK((*skew)[1].second == Rational(3, 5));

  CHECK(!caratheodory_weights(pt1(9), seg(1, 6)).has_value());
}

TEST_CASE("shrink box") {
  const auto b = shrink_box(box1(1, 3), Rational(1, 4));
  CHECK(b.lo(0) == Rational(3, 2));
  CHECK(b.hi(0) == Rational(5, 2));

  const auto once = shrink_box(box1(0, 1), Rational(1, 8));
  const auto twice = shrink_box(once, Rational(1, 8));
  CHECK(once.lo(0) < twice.lo(0));
  CHECK(twice.hi(0) < once.hi(0));

  CHECK_THROWS_AS(shrink_box(box1(0, 1), Rational(1, 2)), input_error);
  CHECK_THROWS_AS(shrink_box(box1(0, 1), Rational(0)), input_error);
}

TEST_CASE("hull idempotence and membership on random polytopes") {
  std::mt19937_64 rng(7ULL);
  auto coin = [&](int lo, int hi) {
    return static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1)) + lo;
  };
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index d = coin(1, 3);
    const int npts = coin(1, 8);
    std::vector<Vec> pts;
    for (int i = 0; i < npts; ++i) {
      Vec v(d);
      for (Eigen::Index j = 0; j < d; ++j) v(j) = Rational(coin(-8, 8), coin(1, 2));
      pts.push_back(std::move(v));
    }
    const auto p = hull(d, pts);
    CHECK(hull(d, p.vertices) == p);

    const auto back = vertices_from_halfspaces(d, facets(p));
    CHECK(Polytope{d, back} == p);

    Box b;
    b.lo = Vec(d);
    b.hi = Vec(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      const int lo = coin(-6, 2);
      b.lo(j) = lo;
      b.hi(j) = lo + coin(1, 6);
    }
    const auto cut = intersect(p, b);
    for (const auto& v : cut.vertices) {
      CHECK(contains(p, v));
      CHECK(b.contains(v));
    }
    // cross-validate separation against emptiness of the intersection
    const auto bp = Polytope{d, b.corners()};
    const auto sep = separating_functional(p, bp, 1);
    CHECK(sep.has_value() == cut.empty());
  }
}

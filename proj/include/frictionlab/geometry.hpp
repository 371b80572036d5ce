#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "frictionlab/linalg.hpp"

namespace frictionlab::geometry {

// {x : normal . x <= offset}
struct Halfspace {
  RowVec normal;
  Rational offset;
};

// Axis-aligned bid-ask box with componentwise lo < hi (efficient friction).
struct Box {
  Vec lo;
  Vec hi;

  Eigen::Index dim() const { return lo.size(); }
  bool valid() const;
  bool contains(const Vec& x) const;
  bool strictly_contains(const Vec& x) const;
  Vec midpoint() const;
  std::vector<Vec> corners() const;
  std::vector<Halfspace> halfspaces() const;
};

// V-representation with exactly the extreme points, lex-sorted; empty vertex
// list encodes the empty set.
struct Polytope {
  Eigen::Index dim = 0;
  std::vector<Vec> vertices;

  bool empty() const { return vertices.empty(); }
  static Polytope empty_set(Eigen::Index dim) { return Polytope{dim, {}}; }
};

bool operator==(const Polytope& a, const Polytope& b);

// Extreme points of conv(points); redundancy removed by exact LP membership
// tests.
Polytope hull(Eigen::Index dim, const std::vector<Vec>& points);

bool contains(const Polytope& p, const Vec& x);

// Minimal H-representation; lower-dimensional sets are first-class (their
// affine hull shows up as halfspace pairs).
std::vector<Halfspace> facets(const Polytope& p);

// Basic solutions of the halfspace system that satisfy every constraint;
// these are exactly the vertices when the system is bounded.
std::vector<Vec> vertices_from_halfspaces(Eigen::Index dim,
                                          const std::vector<Halfspace>& halfspaces);

Polytope intersect(const Polytope& p, const Box& b);
Polytope intersect(const Polytope& p, const Polytope& q);

// Certificate that phi separates q from p with a margin:
//   phi . x <= p_max for all x in P,  phi . s >= q_min for all s in Q,
//   q_min - p_max >= the requested epsilon.
struct Separation {
  RowVec functional;
  Rational p_max;
  Rational q_min;
};

// Returns a functional scaled so the worst-case gap is exactly epsilon, or
// nothing when the polytopes intersect.
std::optional<Separation> separating_functional(const Polytope& p, const Polytope& q,
                                                const Rational& epsilon);

// Equal-weight vertex average; lies in the relative interior.
Vec relative_interior_point(const Polytope& p);

// Convex weights over at most dim+1 vertices reconstructing x, or nothing
// when x is outside.
std::optional<std::vector<std::pair<Vec, Rational>>> caratheodory_weights(const Vec& x,
                                                                          const Polytope& p);

// [lo + eps*w, hi - eps*w] per coordinate; requires 0 < eps < 1/2.
Box shrink_box(const Box& b, const Rational& eps);

Box bounding_box(const Polytope& p);

}  // namespace frictionlab::geometry

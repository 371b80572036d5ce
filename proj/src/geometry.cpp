#include "frictionlab/geometry.hpp"

#include <algorithm>
#include <map>

#include "frictionlab/lp.hpp"

namespace frictionlab::geometry {

namespace {

std::vector<Vec> sorted_unique(std::vector<Vec> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) { return lex_less(a, b); });
  pts.erase(std::unique(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) { return a == b; }),
            pts.end());
  return pts;
}

// feasibility of { sum l_i = 1, sum l_i p_i = x, l >= 0 } restricted to the
// given generator subset
bool in_convex_hull(const std::vector<Vec>& gens, const Vec& x) {
  if (gens.empty()) return false;
  const Eigen::Index d = x.size();
  const Eigen::Index n = static_cast<Eigen::Index>(gens.size());
  lp::LinearProgram prog;
  prog.objective = Vec::Zero(n);
  RowVec ones = RowVec::Ones(n);
  prog.add_row(ones, lp::Rel::eq, 1);
  for (Eigen::Index k = 0; k < d; ++k) {
    RowVec row(n);
    for (Eigen::Index i = 0; i < n; ++i) row(i) = gens[static_cast<std::size_t>(i)](k);
    prog.add_row(std::move(row), lp::Rel::eq, x(k));
  }
  prog.lower.assign(static_cast<std::size_t>(n), Rational(0));
  prog.upper.resize(static_cast<std::size_t>(n));
  return std::holds_alternative<Vec>(lp::feasible_point(prog));
}

// positive primitive scaling of (normal, offset) for exact dedup
void canonicalize(RowVec& a, Rational& b) {
  Integer l = 1;
  for (Eigen::Index j = 0; j < a.size(); ++j) l = boost::multiprecision::lcm(l, denom(a(j)));
  l = boost::multiprecision::lcm(l, denom(b));
  Integer g = 0;
  for (Eigen::Index j = 0; j < a.size(); ++j)
    g = boost::multiprecision::gcd(g, Integer(numer(a(j)) * (l / denom(a(j)))));
  g = boost::multiprecision::gcd(g, Integer(numer(b) * (l / denom(b))));
  if (g == 0) g = 1;
  const Rational scale(l, g);
  a *= scale;
  b *= scale;
}

struct HalfspaceLess {
  bool operator()(const Halfspace& x, const Halfspace& y) const {
    if (x.offset != y.offset) return x.offset < y.offset;
    for (Eigen::Index j = 0; j < x.normal.size(); ++j)
      if (x.normal(j) != y.normal(j)) return x.normal(j) < y.normal(j);
    return false;
  }
};

}  // namespace

bool Box::valid() const {
  if (lo.size() != hi.size() || lo.size() == 0) return false;
  for (Eigen::Index j = 0; j < lo.size(); ++j)
    if (!(lo(j) < hi(j))) return false;
  return true;
}

bool Box::contains(const Vec& x) const {
  for (Eigen::Index j = 0; j < lo.size(); ++j)
    if (x(j) < lo(j) || x(j) > hi(j)) return false;
  return true;
}

bool Box::strictly_contains(const Vec& x) const {
  for (Eigen::Index j = 0; j < lo.size(); ++j)
    if (x(j) <= lo(j) || x(j) >= hi(j)) return false;
  return true;
}

Vec Box::midpoint() const { return (lo + hi) / Rational(2); }

std::vector<Vec> Box::corners() const {
  const Eigen::Index d = dim();
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(1) << d);
  for (std::size_t mask = 0; mask < (static_cast<std::size_t>(1) << d); ++mask) {
    Vec v(d);
    for (Eigen::Index j = 0; j < d; ++j) v(j) = (mask >> j) & 1 ? hi(j) : lo(j);
    out.push_back(std::move(v));
  }
  return sorted_unique(std::move(out));
}

std::vector<Halfspace> Box::halfspaces() const {
  std::vector<Halfspace> hs;
  const Eigen::Index d = dim();
  for (Eigen::Index j = 0; j < d; ++j) {
    RowVec up = RowVec::Zero(d);
    up(j) = 1;
    hs.push_back({up, hi(j)});
    RowVec dn = RowVec::Zero(d);
    dn(j) = -1;
    hs.push_back({dn, -lo(j)});
  }
  return hs;
}

bool operator==(const Polytope& a, const Polytope& b) {
  return a.dim == b.dim && a.vertices == b.vertices;
}

Polytope hull(Eigen::Index dim, const std::vector<Vec>& points) {
  std::vector<Vec> pts = sorted_unique(points);
  if (pts.empty()) return Polytope::empty_set(dim);
  std::vector<Vec> extreme;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<Vec> others;
    others.reserve(pts.size() - 1);
    for (std::size_t k = 0; k < pts.size(); ++k)
      if (k != i) others.push_back(pts[k]);
    if (!in_convex_hull(others, pts[i])) extreme.push_back(pts[i]);
  }
  return Polytope{dim, sorted_unique(std::move(extreme))};
}

bool contains(const Polytope& p, const Vec& x) {
  if (p.empty()) return false;
  return in_convex_hull(p.vertices, x);
}

std::vector<Halfspace> facets(const Polytope& p) {
  if (p.empty()) throw input_error("facets: empty polytope");
  const Eigen::Index d = p.dim;
  const auto& v = p.vertices;
  const Eigen::Index m = static_cast<Eigen::Index>(v.size());

  std::vector<Halfspace> out;
  auto emit = [&](RowVec a, Rational b) {
    canonicalize(a, b);
    out.push_back({std::move(a), std::move(b)});
  };

  Mat dirs(m - 1, d);
  for (Eigen::Index i = 1; i < m; ++i) dirs.row(i - 1) = (v[static_cast<std::size_t>(i)] - v[0]).transpose();
  const Mat normals = m > 1 ? kernel_basis(dirs) : Mat();
  const Eigen::Index r = m > 1 ? d - normals.cols() : 0;

  // affine-hull equalities as halfspace pairs
  if (m == 1) {
    for (Eigen::Index j = 0; j < d; ++j) {
      RowVec a = RowVec::Zero(d);
      a(j) = 1;
      emit(a, v[0](j));
      emit(-a, -v[0](j));
    }
    return out;
  }
  for (Eigen::Index k = 0; k < normals.cols(); ++k) {
    RowVec a = normals.col(k).transpose();
    const Rational b = a.dot(v[0]);
    emit(a, b);
    RowVec neg = -a;
    emit(neg, -b);
  }

  // supporting hyperplanes spanned by r affinely independent vertices,
  // constrained to the hull's direction space
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(r));
  auto scan = [&](auto&& self, Eigen::Index start, Eigen::Index depth) -> void {
    if (depth == r) {
      Mat sys(r - 1 + normals.cols(), d);
      for (Eigen::Index i = 1; i < r; ++i)
        sys.row(i - 1) =
            (v[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] -
             v[static_cast<std::size_t>(idx[0])])
                .transpose();
      for (Eigen::Index k = 0; k < normals.cols(); ++k)
        sys.row(r - 1 + k) = normals.col(k).transpose();
      const Mat ker = kernel_basis(sys);
      if (ker.cols() != 1) return;
      RowVec a = ker.col(0).transpose();
      const Rational b = a.dot(v[static_cast<std::size_t>(idx[0])]);
      bool above = false, below = false;
      for (const auto& w : v) {
        const Rational s = a.dot(w);
        if (s > b) above = true;
        if (s < b) below = true;
        if (above && below) return;
      }
      if (!above) {
        emit(a, b);
      } else {
        emit(-a, -b);
      }
      return;
    }
    for (Eigen::Index k = start; k < m; ++k) {
      idx[static_cast<std::size_t>(depth)] = k;
      self(self, k + 1, depth + 1);
    }
  };
  if (r >= 1) scan(scan, 0, 0);

  std::sort(out.begin(), out.end(), HalfspaceLess{});
  out.erase(std::unique(out.begin(), out.end(),
                        [](const Halfspace& x, const Halfspace& y) {
                          return x.offset == y.offset && x.normal == y.normal;
                        }),
            out.end());
  return out;
}

std::vector<Vec> vertices_from_halfspaces(Eigen::Index dim,
                                          const std::vector<Halfspace>& halfspaces) {
  const Eigen::Index n = static_cast<Eigen::Index>(halfspaces.size());
  std::vector<Vec> found;
  if (n < dim) return found;

  auto feasible = [&](const Vec& x) {
    for (const auto& h : halfspaces)
      if (h.normal.dot(x) > h.offset) return false;
    return true;
  };

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(dim));
  auto scan = [&](auto&& self, Eigen::Index start, Eigen::Index depth) -> void {
    if (depth == dim) {
      Mat a(dim, dim);
      Vec b(dim);
      for (Eigen::Index i = 0; i < dim; ++i) {
        a.row(i) = halfspaces[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])].normal;
        b(i) = halfspaces[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])].offset;
      }
      if (auto x = solve_square(a, b); x && feasible(*x)) found.push_back(*x);
      return;
    }
    for (Eigen::Index k = start; k < n; ++k) {
      idx[static_cast<std::size_t>(depth)] = k;
      self(self, k + 1, depth + 1);
    }
  };
  scan(scan, 0, 0);
  return sorted_unique(std::move(found));
}

Polytope intersect(const Polytope& p, const Box& b) {
  if (p.empty()) return Polytope::empty_set(p.dim);
  auto hs = facets(p);
  const auto extra = b.halfspaces();
  hs.insert(hs.end(), extra.begin(), extra.end());
  return Polytope{p.dim, vertices_from_halfspaces(p.dim, hs)};
}

Polytope intersect(const Polytope& p, const Polytope& q) {
  if (p.empty() || q.empty()) return Polytope::empty_set(p.dim);
  auto hs = facets(p);
  const auto extra = facets(q);
  hs.insert(hs.end(), extra.begin(), extra.end());
  return Polytope{p.dim, vertices_from_halfspaces(p.dim, hs)};
}

std::optional<Separation> separating_functional(const Polytope& p, const Polytope& q,
                                                const Rational& epsilon) {
  if (p.empty() || q.empty()) throw input_error("separating_functional: empty input");
  if (epsilon <= 0) throw input_error("separating_functional: epsilon must be positive");
  const Eigen::Index d = p.dim;

  // vars: phi (free, d), t (free), a (>=0, d with sum <= 1 linking |phi|)
  const Eigen::Index nv = 2 * d + 1;
  lp::LinearProgram prog;
  prog.sense = lp::Sense::maximize;
  prog.objective = Vec::Zero(nv);
  prog.objective(d) = 1;
  for (const auto& x : p.vertices) {
    for (const auto& s : q.vertices) {
      RowVec row = RowVec::Zero(nv);
      for (Eigen::Index j = 0; j < d; ++j) row(j) = s(j) - x(j);
      row(d) = -1;
      prog.add_row(std::move(row), lp::Rel::ge, 0);
    }
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    RowVec up = RowVec::Zero(nv);
    up(d + 1 + j) = 1;
    up(j) = -1;
    prog.add_row(std::move(up), lp::Rel::ge, 0);
    RowVec dn = RowVec::Zero(nv);
    dn(d + 1 + j) = 1;
    dn(j) = 1;
    prog.add_row(std::move(dn), lp::Rel::ge, 0);
  }
  RowVec cap = RowVec::Zero(nv);
  for (Eigen::Index j = 0; j < d; ++j) cap(d + 1 + j) = 1;
  prog.add_row(std::move(cap), lp::Rel::le, 1);
  prog.lower.assign(static_cast<std::size_t>(nv), std::nullopt);
  prog.upper.resize(static_cast<std::size_t>(nv));
  for (Eigen::Index j = 0; j < d; ++j) prog.lower[static_cast<std::size_t>(d + 1 + j)] = Rational(0);

  const auto out = lp::solve(prog);
  if (!out.is_optimal()) throw internal_error("separating_functional: probe lp failed");
  if (out.optimal().value <= 0) return std::nullopt;

  RowVec phi(d);
  for (Eigen::Index j = 0; j < d; ++j) phi(j) = out.optimal().x(j);
  Rational gap;
  bool first = true;
  for (const auto& x : p.vertices) {
    for (const auto& s : q.vertices) {
      const Rational g = phi.dot(s) - phi.dot(x);
      if (first || g < gap) gap = g;
      first = false;
    }
  }
  if (gap <= 0) throw internal_error("separating_functional: nonpositive gap");
  phi *= epsilon / gap;

  Separation sep;
  sep.functional = phi;
  first = true;
  for (const auto& x : p.vertices) {
    const Rational s = phi.dot(x);
    if (first || s > sep.p_max) sep.p_max = s;
    first = false;
  }
  first = true;
  for (const auto& s : q.vertices) {
    const Rational t = phi.dot(s);
    if (first || t < sep.q_min) sep.q_min = t;
    first = false;
  }
  return sep;
}

Vec relative_interior_point(const Polytope& p) {
  if (p.empty()) throw input_error("relative_interior_point: empty polytope");
  Vec sum = Vec::Zero(p.dim);
  for (const auto& v : p.vertices) sum += v;
  return sum / Rational(static_cast<long>(p.vertices.size()));
}

std::optional<std::vector<std::pair<Vec, Rational>>> caratheodory_weights(const Vec& x,
                                                                          const Polytope& p) {
  if (p.empty()) return std::nullopt;
  const Eigen::Index n = static_cast<Eigen::Index>(p.vertices.size());
  lp::LinearProgram prog;
  prog.objective = Vec::Zero(n);
  RowVec ones = RowVec::Ones(n);
  prog.add_row(ones, lp::Rel::eq, 1);
  for (Eigen::Index k = 0; k < p.dim; ++k) {
    RowVec row(n);
    for (Eigen::Index i = 0; i < n; ++i) row(i) = p.vertices[static_cast<std::size_t>(i)](k);
    prog.add_row(std::move(row), lp::Rel::eq, x(k));
  }
  prog.lower.assign(static_cast<std::size_t>(n), Rational(0));
  prog.upper.resize(static_cast<std::size_t>(n));
  const auto point = lp::feasible_point(prog);
  if (!std::holds_alternative<Vec>(point)) return std::nullopt;
  const Vec lambda = std::get<Vec>(point);
  std::vector<std::pair<Vec, Rational>> weights;
  for (Eigen::Index i = 0; i < n; ++i)
    if (lambda(i) > 0) weights.emplace_back(p.vertices[static_cast<std::size_t>(i)], lambda(i));
  return weights;
}

Box shrink_box(const Box& b, const Rational& eps) {
  if (!(eps > 0 && eps < Rational(1, 2))) throw input_error("shrink_box: eps outside (0, 1/2)");
  Box out;
  const Vec w = b.hi - b.lo;
  out.lo = b.lo + eps * w;
  out.hi = b.hi - eps * w;
  return out;
}

Box bounding_box(const Polytope& p) {
  if (p.empty()) throw input_error("bounding_box: empty polytope");
  Box b;
  b.lo = p.vertices.front();
  b.hi = p.vertices.front();
  for (const auto& v : p.vertices) {
    for (Eigen::Index j = 0; j < p.dim; ++j) {
      if (v(j) < b.lo(j)) b.lo(j) = v(j);
      if (v(j) > b.hi(j)) b.hi(j) = v(j);
    }
  }
  return b;
}

}  // namespace frictionlab::geometry

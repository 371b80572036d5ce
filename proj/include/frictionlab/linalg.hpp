#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <vector>

#include "frictionlab/rational.hpp"

namespace frictionlab {

using Vec = Eigen::Matrix<Rational, Eigen::Dynamic, 1>;
using RowVec = Eigen::Matrix<Rational, 1, Eigen::Dynamic>;
using Mat = Eigen::Matrix<Rational, Eigen::Dynamic, Eigen::Dynamic>;

inline Vec vec_of(std::initializer_list<Rational> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (const auto& x : xs) v(i++) = x;
  return v;
}

inline Vec vec_from(const std::vector<Rational>& xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = xs[static_cast<std::size_t>(i)];
  return v;
}

inline bool lex_less(const Vec& a, const Vec& b) {
  for (Eigen::Index i = 0; i < a.size() && i < b.size(); ++i) {
    if (a(i) != b(i)) return a(i) < b(i);
  }
  return a.size() < b.size();
}

// Exact kernel basis of A (columns span {x : A x = 0}); plain fraction-free
// elimination, no pivot thresholds.
Mat kernel_basis(const Mat& a);

Eigen::Index exact_rank(const Mat& a);

// Solves A x = b exactly; empty result if singular/inconsistent.
std::optional<Vec> solve_square(const Mat& a, const Vec& b);

}  // namespace frictionlab

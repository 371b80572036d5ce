#include "frictionlab/linalg.hpp"

namespace frictionlab {

namespace {

// Row echelon form with full bookkeeping of pivot columns; exact pivots.
struct Echelon {
  Mat m;
  std::vector<Eigen::Index> pivot_cols;
};

Echelon echelon(Mat a) {
  Echelon e;
  const Eigen::Index rows = a.rows(), cols = a.cols();
  Eigen::Index r = 0;
  for (Eigen::Index c = 0; c < cols && r < rows; ++c) {
    Eigen::Index p = -1;
    for (Eigen::Index i = r; i < rows; ++i) {
      if (a(i, c) != 0) {
        p = i;
        break;
      }
    }
    if (p < 0) continue;
    if (p != r) a.row(p).swap(a.row(r));
    const Rational inv = Rational(1) / a(r, c);
    a.row(r) *= inv;
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (i != r && a(i, c) != 0) a.row(i) -= a(i, c) * a.row(r);
    }
    e.pivot_cols.push_back(c);
    ++r;
  }
  e.m = std::move(a);
  return e;
}

}  // namespace

Eigen::Index exact_rank(const Mat& a) {
  if (a.size() == 0) return 0;
  return static_cast<Eigen::Index>(echelon(a).pivot_cols.size());
}

Mat kernel_basis(const Mat& a) {
  const Eigen::Index cols = a.cols();
  if (a.rows() == 0 || cols == 0) {
    Mat id = Mat::Zero(cols, cols);
    for (Eigen::Index i = 0; i < cols; ++i) id(i, i) = 1;
    return id;
  }
  Echelon e = echelon(a);
  std::vector<bool> is_pivot(static_cast<std::size_t>(cols), false);
  for (auto c : e.pivot_cols) is_pivot[static_cast<std::size_t>(c)] = true;

  const Eigen::Index free_count = cols - static_cast<Eigen::Index>(e.pivot_cols.size());
  Mat basis = Mat::Zero(cols, free_count);
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (is_pivot[static_cast<std::size_t>(c)]) continue;
    basis(c, k) = 1;
    for (std::size_t pr = 0; pr < e.pivot_cols.size(); ++pr) {
      basis(e.pivot_cols[pr], k) = -e.m(static_cast<Eigen::Index>(pr), c);
    }
    ++k;
  }
  return basis;
}

std::optional<Vec> solve_square(const Mat& a, const Vec& b) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.size() != n) return std::nullopt;
  Mat aug(n, n + 1);
  aug.leftCols(n) = a;
  aug.col(n) = b;
  Echelon e = echelon(aug);
  // singular or inconsistent if a pivot lands in the rhs column or rank < n
  if (static_cast<Eigen::Index>(e.pivot_cols.size()) != n) return std::nullopt;
  for (auto c : e.pivot_cols)
    if (c == n) return std::nullopt;
  Vec x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(e.pivot_cols[static_cast<std::size_t>(i)]) = e.m(i, n);
  return x;
}

}  // namespace frictionlab

#include "frictionlab/lp.hpp"

#include <algorithm>

namespace frictionlab::lp {

void LinearProgram::add_row(RowVec a, Rel rel, Rational b) {
  rows.push_back(Constraint{std::move(a), rel, std::move(b)});
}

namespace {

Rational dot(const RowVec& a, const Vec& x) {
  Rational s = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a(i) != 0) s += a(i) * x(i);
  return s;
}

void check_shape(const LinearProgram& lp) {
  const Eigen::Index n = lp.num_vars();
  if (n == 0) throw input_error("lp: no variables");
  for (const auto& row : lp.rows)
    if (row.a.size() != n) throw input_error("lp: row dimension mismatch");
  if (!lp.lower.empty() && static_cast<Eigen::Index>(lp.lower.size()) != n)
    throw input_error("lp: lower bound vector size mismatch");
  if (!lp.upper.empty() && static_cast<Eigen::Index>(lp.upper.size()) != n)
    throw input_error("lp: upper bound vector size mismatch");
}

std::optional<Rational> lower_of(const LinearProgram& lp, Eigen::Index j) {
  if (lp.lower.empty()) return std::nullopt;
  return lp.lower[static_cast<std::size_t>(j)];
}
std::optional<Rational> upper_of(const LinearProgram& lp, Eigen::Index j) {
  if (lp.upper.empty()) return std::nullopt;
  return lp.upper[static_cast<std::size_t>(j)];
}

// Internal standard form: min c.u  s.t.  A u = b, u >= 0, b >= 0.
// Public variables are shifted to their lower bound, reflected through their
// upper bound, or split into positive/negative parts; upper bounds of
// two-sided variables become explicit internal rows.
class Simplex {
 public:
  explicit Simplex(const LinearProgram& lp) : lp_(lp) { build(); }

  LpOutcome run() {
    if (early_infeasible_) return make_infeasible_from_bounds();
    if (!phase1()) return make_infeasible();
    if (!phase2()) return LpOutcome{Unbounded{}};
    return make_optimal();
  }

 private:
  enum class ColKind { shifted_lo, reflected_up, free_pos, free_neg, slack, surplus, artificial };
  struct Col {
    ColKind kind;
    Eigen::Index var = -1;   // public variable for structural columns
    Eigen::Index row = -1;   // internal row for slack/surplus/artificial
  };
  enum class RowOrigin { public_row, upper_bound };
  struct RowInfo {
    RowOrigin origin;
    Eigen::Index index;  // public row index, or public var for bound rows
    int flip = 1;        // -1 if the row was negated to make rhs >= 0
    Eigen::Index identity_col = -1;
    bool erased = false;
  };

  const LinearProgram& lp_;
  bool maximize_ = false;
  bool early_infeasible_ = false;
  Eigen::Index early_var_ = -1;

  std::vector<Col> cols_;
  std::vector<RowInfo> row_info_;
  std::vector<Eigen::Index> var_col_;  // first structural col of each public var
  Vec shift_;                          // x = shift + (signed combination of cols)
  Rational obj_offset_;

  Mat t_;                   // m x (ncols + 1); last column is the rhs
  RowVec z1_, z2_;          // reduced-cost rows (phase 1 / phase 2)
  Vec c1_, c2_;             // column costs
  std::vector<Eigen::Index> basis_;
  Eigen::Index ncols_ = 0;
  Eigen::Index first_artificial_ = 0;

  void build() {
    check_shape(lp_);
    maximize_ = lp_.sense == Sense::maximize;
    const Eigen::Index n = lp_.num_vars();
    shift_ = Vec::Zero(n);
    var_col_.assign(static_cast<std::size_t>(n), -1);

    std::vector<Eigen::Index> bound_row_vars;
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto lo = lower_of(lp_, j);
      const auto up = upper_of(lp_, j);
      var_col_[static_cast<std::size_t>(j)] = static_cast<Eigen::Index>(cols_.size());
      if (lo) {
        if (up && *up < *lo) {
          early_infeasible_ = true;
          early_var_ = j;
          return;
        }
        shift_(j) = *lo;
        cols_.push_back({ColKind::shifted_lo, j, -1});
        if (up) bound_row_vars.push_back(j);
      } else if (up) {
        shift_(j) = *up;
        cols_.push_back({ColKind::reflected_up, j, -1});
      } else {
        cols_.push_back({ColKind::free_pos, j, -1});
        cols_.push_back({ColKind::free_neg, j, -1});
      }
    }
    const Eigen::Index nstruct = static_cast<Eigen::Index>(cols_.size());

    const Eigen::Index m_pub = static_cast<Eigen::Index>(lp_.rows.size());
    const Eigen::Index m = m_pub + static_cast<Eigen::Index>(bound_row_vars.size());

    struct RawRow {
      RowVec a;
      Rel rel;
      Rational b;
    };
    std::vector<RawRow> raw;
    raw.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m_pub; ++i) {
      const auto& row = lp_.rows[static_cast<std::size_t>(i)];
      RowVec a = RowVec::Zero(nstruct);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (row.a(j) == 0) continue;
        const Eigen::Index c0 = var_col_[static_cast<std::size_t>(j)];
        switch (cols_[static_cast<std::size_t>(c0)].kind) {
          case ColKind::shifted_lo:
            a(c0) += row.a(j);
            break;
          case ColKind::reflected_up:
            a(c0) -= row.a(j);
            break;
          default:
            a(c0) += row.a(j);
            a(c0 + 1) -= row.a(j);
            break;
        }
      }
      raw.push_back({std::move(a), row.rel, row.b - dot(row.a, shift_)});
      row_info_.push_back({RowOrigin::public_row, i, 1, -1, false});
    }
    for (Eigen::Index j : bound_row_vars) {
      RowVec a = RowVec::Zero(nstruct);
      a(var_col_[static_cast<std::size_t>(j)]) = 1;
      raw.push_back({std::move(a), Rel::le, *upper_of(lp_, j) - *lower_of(lp_, j)});
      row_info_.push_back({RowOrigin::upper_bound, j, 1, -1, false});
    }

    for (Eigen::Index i = 0; i < m; ++i) {
      if (raw[static_cast<std::size_t>(i)].b < 0) {
        raw[static_cast<std::size_t>(i)].a *= Rational(-1);
        raw[static_cast<std::size_t>(i)].b *= Rational(-1);
        auto& rel = raw[static_cast<std::size_t>(i)].rel;
        rel = rel == Rel::le ? Rel::ge : (rel == Rel::ge ? Rel::le : Rel::eq);
        row_info_[static_cast<std::size_t>(i)].flip = -1;
      }
    }

    // slack/surplus, then artificials
    std::vector<Eigen::Index> slack_col(static_cast<std::size_t>(m), -1);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Rel rel = raw[static_cast<std::size_t>(i)].rel;
      if (rel == Rel::le || rel == Rel::ge) {
        slack_col[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(cols_.size());
        cols_.push_back({rel == Rel::le ? ColKind::slack : ColKind::surplus, -1, i});
      }
    }
    first_artificial_ = static_cast<Eigen::Index>(cols_.size());
    std::vector<Eigen::Index> art_col(static_cast<std::size_t>(m), -1);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Rel rel = raw[static_cast<std::size_t>(i)].rel;
      if (rel == Rel::eq || rel == Rel::ge) {
        art_col[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(cols_.size());
        cols_.push_back({ColKind::artificial, -1, i});
      }
    }
    ncols_ = static_cast<Eigen::Index>(cols_.size());

    t_ = Mat::Zero(m, ncols_ + 1);
    basis_.assign(static_cast<std::size_t>(m), -1);
    for (Eigen::Index i = 0; i < m; ++i) {
      t_.block(i, 0, 1, nstruct) = raw[static_cast<std::size_t>(i)].a;
      t_(i, ncols_) = raw[static_cast<std::size_t>(i)].b;
      const Rel rel = raw[static_cast<std::size_t>(i)].rel;
      if (rel == Rel::le) {
        t_(i, slack_col[static_cast<std::size_t>(i)]) = 1;
        basis_[static_cast<std::size_t>(i)] = slack_col[static_cast<std::size_t>(i)];
        row_info_[static_cast<std::size_t>(i)].identity_col = slack_col[static_cast<std::size_t>(i)];
      } else {
        if (rel == Rel::ge) t_(i, slack_col[static_cast<std::size_t>(i)]) = -1;
        t_(i, art_col[static_cast<std::size_t>(i)]) = 1;
        basis_[static_cast<std::size_t>(i)] = art_col[static_cast<std::size_t>(i)];
        row_info_[static_cast<std::size_t>(i)].identity_col = art_col[static_cast<std::size_t>(i)];
      }
    }

    c1_ = Vec::Zero(ncols_);
    c2_ = Vec::Zero(ncols_);
    for (Eigen::Index c = 0; c < ncols_; ++c) {
      const Col& col = cols_[static_cast<std::size_t>(c)];
      if (col.kind == ColKind::artificial) c1_(c) = 1;
      if (col.var >= 0) {
        Rational cj = lp_.objective(col.var);
        if (maximize_) cj = -cj;
        switch (col.kind) {
          case ColKind::shifted_lo:
          case ColKind::free_pos:
            c2_(c) = cj;
            break;
          case ColKind::reflected_up:
          case ColKind::free_neg:
            c2_(c) = -cj;
            break;
          default:
            break;
        }
      }
    }
    obj_offset_ = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      Rational cj = lp_.objective(j);
      if (maximize_) cj = -cj;
      if (cj != 0 && shift_(j) != 0) obj_offset_ += cj * shift_(j);
    }

    z1_ = RowVec::Zero(ncols_ + 1);
    z2_ = RowVec::Zero(ncols_ + 1);
    for (Eigen::Index c = 0; c < ncols_; ++c) {
      z1_(c) = c1_(c);
      z2_(c) = c2_(c);
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index b = basis_[static_cast<std::size_t>(i)];
      if (c1_(b) != 0) z1_ -= c1_(b) * t_.row(i);
      if (c2_(b) != 0) z2_ -= c2_(b) * t_.row(i);
    }
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    const Rational inv = Rational(1) / t_(row, col);
    if (inv != 1) t_.row(row) *= inv;
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == row) continue;
      const Rational f = t_(i, col);
      if (f != 0) t_.row(i) -= f * t_.row(row);
    }
    if (z1_(col) != 0) z1_ -= z1_(col) * t_.row(row);
    if (z2_(col) != 0) z2_ -= z2_(col) * t_.row(row);
    basis_[static_cast<std::size_t>(row)] = col;
  }

  // Bland's rule: entering = lowest-index negative reduced cost; leaving =
  // lowest basis index among minimum ratios. Guarantees termination.
  bool iterate(const RowVec& z, bool allow_artificial) {
    for (;;) {
      Eigen::Index enter = -1;
      for (Eigen::Index c = 0; c < ncols_; ++c) {
        if (!allow_artificial && cols_[static_cast<std::size_t>(c)].kind == ColKind::artificial)
          continue;
        if (z(c) < 0) {
          enter = c;
          break;
        }
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      Rational best;
      for (Eigen::Index i = 0; i < t_.rows(); ++i) {
        if (t_(i, enter) <= 0) continue;
        const Rational ratio = t_(i, ncols_) / t_(i, enter);
        if (leave < 0 || ratio < best ||
            (ratio == best &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return false;  // unbounded in this phase
      pivot(leave, enter);
    }
  }

  const RowVec& z_active() const { return z2_; }

  bool phase1() {
    if (first_artificial_ == ncols_) return true;  // no artificials needed
    if (!iterate(z1_, true)) throw internal_error("lp: phase-1 unbounded");
    if (-z1_(ncols_) > 0) return false;
    remove_basic_artificials();
    return true;
  }

  void remove_basic_artificials() {
    std::vector<Eigen::Index> to_erase;
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      const Eigen::Index b = basis_[static_cast<std::size_t>(i)];
      if (cols_[static_cast<std::size_t>(b)].kind != ColKind::artificial) continue;
      Eigen::Index c = -1;
      for (Eigen::Index j = 0; j < first_artificial_; ++j) {
        if (t_(i, j) != 0) {
          c = j;
          break;
        }
      }
      if (c >= 0) {
        pivot(i, c);
      } else {
        to_erase.push_back(i);
      }
    }
    if (to_erase.empty()) return;
    // redundant equations: drop the rows entirely
    std::vector<bool> drop(static_cast<std::size_t>(t_.rows()), false);
    for (auto i : to_erase) drop[static_cast<std::size_t>(i)] = true;
    const Eigen::Index kept = t_.rows() - static_cast<Eigen::Index>(to_erase.size());
    Mat nt(kept, ncols_ + 1);
    std::vector<Eigen::Index> nbasis;
    Eigen::Index r = 0;
    Eigen::Index old = 0;
    std::size_t info_i = 0;
    for (auto& info : row_info_) {
      if (info.erased) {
        ++info_i;
        continue;
      }
      if (drop[static_cast<std::size_t>(old)]) {
        info.erased = true;
      } else {
        nt.row(r) = t_.row(old);
        nbasis.push_back(basis_[static_cast<std::size_t>(old)]);
        ++r;
      }
      ++old;
      ++info_i;
    }
    t_ = std::move(nt);
    basis_ = std::move(nbasis);
  }

  bool phase2() { return iterate(z2_, false); }

  Vec internal_solution() const {
    Vec u = Vec::Zero(ncols_);
    for (Eigen::Index i = 0; i < t_.rows(); ++i)
      u(basis_[static_cast<std::size_t>(i)]) = t_(i, ncols_);
    return u;
  }

  Vec public_solution() const {
    const Vec u = internal_solution();
    Vec x = shift_;
    for (Eigen::Index c = 0; c < ncols_; ++c) {
      const Col& col = cols_[static_cast<std::size_t>(c)];
      if (col.var < 0) continue;
      switch (col.kind) {
        case ColKind::shifted_lo:
        case ColKind::free_pos:
          x(col.var) += u(c);
          break;
        case ColKind::reflected_up:
        case ColKind::free_neg:
          x(col.var) -= u(c);
          break;
        default:
          break;
      }
    }
    return x;
  }

  // y_i = cost(identity col of row i) - reduced_cost(identity col); rows
  // erased as redundant get multiplier zero.
  Vec row_multipliers(const RowVec& z, const Vec& cost) const {
    Vec y = Vec::Zero(static_cast<Eigen::Index>(row_info_.size()));
    for (std::size_t i = 0; i < row_info_.size(); ++i) {
      const auto& info = row_info_[i];
      if (info.erased) continue;
      const Eigen::Index k = info.identity_col;
      y(static_cast<Eigen::Index>(i)) = cost(k) - z(k);
    }
    return y;
  }

  DualCertificate build_certificate(const RowVec& z, const Vec& cost) const {
    const Eigen::Index n = lp_.num_vars();
    const Eigen::Index m_pub = static_cast<Eigen::Index>(lp_.rows.size());
    const Vec y_all = row_multipliers(z, cost);
    DualCertificate cert;
    cert.row_dual = Vec::Zero(m_pub);
    cert.lower_dual = Vec::Zero(n);
    cert.upper_dual = Vec::Zero(n);
    for (std::size_t i = 0; i < row_info_.size(); ++i) {
      const auto& info = row_info_[i];
      const Rational y = Rational(info.flip) * y_all(static_cast<Eigen::Index>(i));
      if (info.origin == RowOrigin::public_row) {
        cert.row_dual(info.index) = y;
      } else {
        cert.upper_dual(info.index) += -y;  // bound row is u_j <= up - lo
      }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index c0 = var_col_[static_cast<std::size_t>(j)];
      const Col& col = cols_[static_cast<std::size_t>(c0)];
      if (col.kind == ColKind::shifted_lo) {
        cert.lower_dual(j) += z(c0);
      } else if (col.kind == ColKind::reflected_up) {
        cert.upper_dual(j) += z(c0);
      }
    }
    return cert;
  }

  LpOutcome make_optimal() const {
    Optimal opt;
    opt.x = public_solution();
    const Rational value_min = -z2_(ncols_) + obj_offset_;
    opt.value = maximize_ ? Rational(-value_min) : value_min;
    opt.dual = build_certificate(z2_, c2_);
    if (maximize_) {
      opt.dual.row_dual = -opt.dual.row_dual;
      opt.dual.lower_dual = -opt.dual.lower_dual;
      opt.dual.upper_dual = -opt.dual.upper_dual;
    }
    if (!verify_optimal(lp_, opt)) throw internal_error("lp: optimal certificate failed");
    return LpOutcome{std::move(opt)};
  }

  LpOutcome make_infeasible() const {
    Infeasible inf;
    inf.farkas = build_certificate(z1_, c1_);
    if (!verify_infeasible(lp_, inf)) throw internal_error("lp: farkas certificate failed");
    return LpOutcome{std::move(inf)};
  }

  LpOutcome make_infeasible_from_bounds() const {
    Infeasible inf;
    const Eigen::Index n = lp_.num_vars();
    inf.farkas.row_dual = Vec::Zero(static_cast<Eigen::Index>(lp_.rows.size()));
    inf.farkas.lower_dual = Vec::Zero(n);
    inf.farkas.upper_dual = Vec::Zero(n);
    inf.farkas.lower_dual(early_var_) = 1;
    inf.farkas.upper_dual(early_var_) = 1;
    if (!verify_infeasible(lp_, inf)) throw internal_error("lp: bound certificate failed");
    return LpOutcome{std::move(inf)};
  }
};

}  // namespace

LpOutcome solve(const LinearProgram& lp) { return Simplex(lp).run(); }

std::variant<Vec, Infeasible> feasible_point(const LinearProgram& lp) {
  LinearProgram probe = lp;
  probe.sense = Sense::minimize;
  probe.objective = Vec::Zero(lp.num_vars());
  LpOutcome out = solve(probe);
  if (out.is_optimal()) return out.optimal().x;
  if (out.is_infeasible()) return out.infeasible();
  throw internal_error("lp: feasibility probe unbounded");
}

bool primal_feasible(const LinearProgram& lp, const Vec& x) {
  if (x.size() != lp.num_vars()) return false;
  for (const auto& row : lp.rows) {
    const Rational lhs = dot(row.a, x);
    if (row.rel == Rel::le && !(lhs <= row.b)) return false;
    if (row.rel == Rel::ge && !(lhs >= row.b)) return false;
    if (row.rel == Rel::eq && lhs != row.b) return false;
  }
  for (Eigen::Index j = 0; j < lp.num_vars(); ++j) {
    if (const auto lo = lower_of(lp, j); lo && x(j) < *lo) return false;
    if (const auto up = upper_of(lp, j); up && x(j) > *up) return false;
  }
  return true;
}

namespace {

// Shared dual-feasibility core: checks signs and computes A^T y + lo_dual -
// up_dual and the dual objective; target_c is the min-form objective (zero for
// Farkas certificates).
bool dual_consistent(const LinearProgram& lp, const DualCertificate& cert, const Vec& target_c,
                     Rational& dual_value) {
  const Eigen::Index n = lp.num_vars();
  const Eigen::Index m = static_cast<Eigen::Index>(lp.rows.size());
  if (cert.row_dual.size() != m || cert.lower_dual.size() != n || cert.upper_dual.size() != n)
    return false;

  Vec combo = Vec::Zero(n);
  dual_value = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& row = lp.rows[static_cast<std::size_t>(i)];
    const Rational y = cert.row_dual(i);
    if (row.rel == Rel::ge && y < 0) return false;
    if (row.rel == Rel::le && y > 0) return false;
    if (y == 0) continue;
    for (Eigen::Index j = 0; j < n; ++j) combo(j) += y * row.a(j);
    dual_value += y * row.b;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    const Rational mu_lo = cert.lower_dual(j);
    const Rational mu_up = cert.upper_dual(j);
    if (mu_lo < 0 || mu_up < 0) return false;
    const auto lo = lower_of(lp, j);
    const auto up = upper_of(lp, j);
    if (mu_lo != 0) {
      if (!lo) return false;
      combo(j) += mu_lo;
      dual_value += mu_lo * *lo;
    }
    if (mu_up != 0) {
      if (!up) return false;
      combo(j) -= mu_up;
      dual_value -= mu_up * *up;
    }
  }
  return combo == target_c;
}

}  // namespace

bool verify_optimal(const LinearProgram& lp, const Optimal& opt) {
  if (!primal_feasible(lp, opt.x)) return false;
  Vec c_min = lp.objective;
  Rational value_min = opt.value;
  DualCertificate cert = opt.dual;
  if (lp.sense == Sense::maximize) {
    c_min = -c_min;
    value_min = -value_min;
    cert.row_dual = -cert.row_dual;
    cert.lower_dual = -cert.lower_dual;
    cert.upper_dual = -cert.upper_dual;
  }
  Rational primal = 0;
  for (Eigen::Index j = 0; j < lp.num_vars(); ++j)
    if (c_min(j) != 0) primal += c_min(j) * opt.x(j);
  if (primal != value_min) return false;
  Rational dual_value;
  if (!dual_consistent(lp, cert, c_min, dual_value)) return false;
  return dual_value == value_min;
}

bool verify_infeasible(const LinearProgram& lp, const Infeasible& inf) {
  Rational dual_value;
  if (!dual_consistent(lp, inf.farkas, Vec::Zero(lp.num_vars()), dual_value)) return false;
  return dual_value > 0;
}

}  // namespace frictionlab::lp

#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "frictionlab/linalg.hpp"

namespace frictionlab::lp {

enum class Sense { minimize, maximize };
enum class Rel { le, eq, ge };

struct Constraint {
  RowVec a;
  Rel rel = Rel::le;
  Rational b;
};

struct LinearProgram {
  Sense sense = Sense::minimize;
  Vec objective;
  std::vector<Constraint> rows;
  // Optional per-variable bounds; empty vectors mean "all free".
  std::vector<std::optional<Rational>> lower;
  std::vector<std::optional<Rational>> upper;

  Eigen::Index num_vars() const { return objective.size(); }
  void add_row(RowVec a, Rel rel, Rational b);
};

// Dual certificate, stated for the minimization form of the program (a
// maximization is certified through min of the negated objective, whose
// optimal value is -value).  Feasibility of the certificate means:
//   row_dual_i >= 0 on >= rows, <= 0 on <= rows, free on == rows,
//   lower_dual >= 0, upper_dual >= 0, and exactly
//   c = A^T row_dual + lower_dual - upper_dual.
// Strong duality then reads
//   value = b . row_dual + lo . lower_dual - up . upper_dual.
struct DualCertificate {
  Vec row_dual;
  Vec lower_dual;
  Vec upper_dual;
};

struct Optimal {
  Vec x;
  Rational value;  // in the caller's sense
  DualCertificate dual;
};

// Farkas certificate: same shape as a dual, combining the constraints into
//   0 = A^T y + lower - upper   with   b.y + lo.lower - up.upper > 0,
// an exact proof that no point satisfies all rows and bounds.
struct Infeasible {
  DualCertificate farkas;
};

struct Unbounded {};

struct LpOutcome {
  std::variant<Optimal, Infeasible, Unbounded> result;

  bool is_optimal() const { return std::holds_alternative<Optimal>(result); }
  bool is_infeasible() const { return std::holds_alternative<Infeasible>(result); }
  bool is_unbounded() const { return std::holds_alternative<Unbounded>(result); }
  const Optimal& optimal() const { return std::get<Optimal>(result); }
  const Infeasible& infeasible() const { return std::get<Infeasible>(result); }
};

// Exact simplex with Bland's pivot rule; deterministic, certificate-checked
// before returning.  Throws input_error on malformed programs.
LpOutcome solve(const LinearProgram& lp);

// Point satisfying the rows/bounds, or a Farkas certificate.
std::variant<Vec, Infeasible> feasible_point(const LinearProgram& lp);

// Exact re-substitution checks; used by solve() itself and by the
// certificate-verification paths of the higher modules.
bool primal_feasible(const LinearProgram& lp, const Vec& x);
bool verify_optimal(const LinearProgram& lp, const Optimal& opt);
bool verify_infeasible(const LinearProgram& lp, const Infeasible& inf);

}  // namespace frictionlab::lp

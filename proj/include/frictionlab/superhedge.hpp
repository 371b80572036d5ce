#pragma once

#include "frictionlab/lp.hpp"
#include "frictionlab/support_sets.hpp"

namespace frictionlab::superhedge {

// Piecewise-linear concave function stored by the extreme points of its
// hypograph; the value is the upper concave envelope of the stored pairs,
// minus infinity outside their convex hull.  An empty support list is the
// everywhere minus-infinity function.
struct ConcavePL {
  Eigen::Index dim = 0;
  std::vector<std::pair<Vec, Rational>> support;

  bool empty() const { return support.empty(); }
  geometry::Polytope domain() const;
  std::optional<Rational> value_at(const Vec& x) const;
};

// Upper concave envelope of arbitrary (point, value) pairs; dominated pairs
// are dropped so every stored pair lies on the envelope.
ConcavePL envelope_of(Eigen::Index dim, const std::vector<std::pair<Vec, Rational>>& pairs);

// Extreme hypograph pairs of f restricted to the polytope p (p must sit
// inside f's domain).
std::vector<std::pair<Vec, Rational>> restrict_pairs(const ConcavePL& f,
                                                     const geometry::Polytope& p);

// One pooled constraint row of a conditional problem: a point of a child's
// restricted hypograph together with its value.
struct PooledPair {
  int child = -1;
  Vec point;
  Rational value;
};

struct BackwardData {
  std::vector<ConcavePL> f;                   // F_t(n, .) per node
  std::vector<std::vector<PooledPair>> pool;  // per internal node
};

// Backward sweep: leaves carry g on their box; a node's function is the
// envelope of its children's hypograph points restricted to their support
// sets.  Children with empty support contribute nothing.
BackwardData backward_f(const market::ScenarioTree& tree, const market::BidAskProcess& spread,
                        const support_sets::SupportSets& sets, const market::Claim& claim);

struct PriceResult {
  bool degenerate = false;  // root support empty: no price system charges anything
  Rational price;
  Vec maximizer;  // lexicographically smallest maximizer of F_0 over C_0
};

PriceResult price(const market::ScenarioTree& tree, const market::BidAskProcess& spread,
                  const support_sets::SupportSets& sets, const BackwardData& bd);

// Forward extraction of the frictionless price process and the
// trade-direction-consistent strategy.
struct Extraction {
  std::vector<Vec> price_process;                  // S-hat per node
  market::Strategy strategy;                       // H_{t+1} at internal nodes
  std::vector<bool> on_support;                    // chain of finite values
  std::vector<std::optional<Rational>> value_fn;   // X_t per node where finite
  std::vector<Rational> charged_mass;              // dual mass reaching each node
};

Extraction extract(const market::ScenarioTree& tree, const market::BidAskProcess& spread,
                   const support_sets::SupportSets& sets, const BackwardData& bd,
                   const PriceResult& pr, const market::Claim& claim);

// Exact linearization of consistent price systems: mass q(n) >= 0 and moment
// theta(n) = q(n) S(n), with conservation and box rows.  Feasible points are
// precisely the price systems of the tree.
struct CpsLpSolution {
  Rational objective;
  std::vector<Rational> node_mass;
  std::vector<Vec> node_moment;

  std::optional<Vec> price_at(int node) const;  // theta/q on charged nodes
};

struct CpsLpOutcome {
  std::optional<CpsLpSolution> solution;
  std::optional<lp::Infeasible> farkas;  // set when no price system exists
};

CpsLpOutcome solve_cps_lp(const market::ScenarioTree& tree, const market::BidAskProcess& spread,
                          const std::map<int, Rational>& leaf_objective);

struct EfficientSupport {
  std::vector<int> leaves;                // members of Omega*, in tree order
  std::map<int, Rational> witness_mass;   // positive CPS mass per member
  std::optional<lp::Infeasible> farkas;   // certificate when empty

  bool contains(int leaf) const;
  bool empty() const { return leaves.empty(); }
};

EfficientSupport omega_star(const market::ScenarioTree& tree,
                            const market::BidAskProcess& spread);

// Largest mass any price system puts on one leaf (the per-leaf membership
// test in its literal form; omega_star uses a batched equivalent).
Rational max_leaf_mass(const market::ScenarioTree& tree, const market::BidAskProcess& spread,
                       int leaf);

struct OraclePrice {
  Rational value;
  CpsLpSolution optimizer;
};

// sup over price systems of the expected claim; nothing when none exists.
std::optional<OraclePrice> oracle_price(const market::ScenarioTree& tree,
                                        const market::BidAskProcess& spread,
                                        const market::Claim& claim);

struct SuperhedgeSolution {
  PriceResult price;
  std::optional<Extraction> extraction;
  EfficientSupport support;
  std::optional<OraclePrice> oracle;
  std::optional<Rational> duality_gap;  // price minus oracle value
};

SuperhedgeSolution solve(const market::ScenarioTree& tree, const market::BidAskProcess& spread,
                         const market::Claim& claim);

}  // namespace frictionlab::superhedge

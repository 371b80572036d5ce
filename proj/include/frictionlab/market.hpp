#pragma once

#include <map>
#include <string>
#include <vector>

#include "frictionlab/geometry.hpp"

namespace frictionlab::market {

// Rooted tree of filtration atoms; node k at depth t is the time-t atom of
// every path through it.
struct ScenarioTree {
  struct Node {
    std::string id;
    int depth = 0;
    int parent = -1;  // index, -1 for the root
    std::vector<int> children;
  };

  int horizon = 0;
  std::vector<Node> nodes;  // index 0 is the root; parents precede children
  std::vector<int> leaves;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  bool is_leaf(int k) const { return nodes[static_cast<std::size_t>(k)].children.empty(); }
  int index_of(const std::string& id) const;  // -1 if unknown
};

// Per-node bid-ask box over d assets, in units of the numeraire.
struct BidAskProcess {
  Eigen::Index assets = 0;
  std::vector<geometry::Box> box;  // indexed like tree.nodes

  const geometry::Box& at(int node) const { return box[static_cast<std::size_t>(node)]; }
};

BidAskProcess shrink(const BidAskProcess& spread, const Rational& eps);

// H stored at depth  t < T nodes: the position vector carried over (t, t+1];
// H_0 = H_{T+1} = 0 implicitly.
struct Strategy {
  std::vector<Vec> holding;  // indexed like tree.nodes; leaves unused

  const Vec& at(int node) const { return holding[static_cast<std::size_t>(node)]; }
};

Strategy zero_strategy(const ScenarioTree& tree, Eigen::Index assets);

// Terminal payoff in numeraire units, one entry per leaf.
struct Claim {
  std::map<int, Rational> payoff;  // leaf index -> g

  const Rational& at(int leaf) const { return payoff.at(leaf); }
};

struct ValidationReport {
  bool ok = true;
  std::string message;
};

// Accepts iff the tree invariants hold and every box has bid < ask
// componentwise; rejects naming the first violated invariant.
ValidationReport validate(const ScenarioTree& tree, const BidAskProcess& spread);

// Exact terminal wealth per leaf: buys execute at the ask, sells at the bid,
// the final position is liquidated at the leaf.
std::vector<Rational> value(const ScenarioTree& tree, const BidAskProcess& spread,
                            const Strategy& h);

// Trade executed at node `node` when moving from the inherited position
// `from` to `to`: cash received (negative = paid).
Rational trade_cash_flow(const geometry::Box& prices, const Vec& from, const Vec& to);

// Discrete stochastic integral sum_t H_t . (S_t - S_{t-1}) per leaf, for a
// frictionless price process S given per node.
std::vector<Rational> frictionless_integral(const ScenarioTree& tree, const Strategy& h,
                                            const std::vector<Vec>& price);

// Solvency cone at one node: exchange matrix pi over assets 0..d (0 is the
// numeraire), pi[i][i] = 1, pi[i][j] = units of i exchanged for one unit of j.
struct SolvencyCone {
  Mat pi;  // (d+1) x (d+1)

  Eigen::Index assets() const { return pi.rows() - 1; }
  std::vector<Vec> generators() const;  // e_i and pi_ij e_i - e_j
};

SolvencyCone cone_from_box(const geometry::Box& box);

// True at a node iff the rebalance (with its cash leg from the value
// accounting) lies in -K, decided by an exact LP over the cone generators.
bool rebalance_solvent(const SolvencyCone& cone, const geometry::Box& prices, const Vec& from,
                       const Vec& to);

// Per-node solvency of a whole strategy, in node index order.
std::vector<bool> solvency_check(const ScenarioTree& tree, const std::vector<SolvencyCone>& cones,
                                 const BidAskProcess& spread, const Strategy& h);

}  // namespace frictionlab::market

#include "frictionlab/market.hpp"

#include "frictionlab/lp.hpp"

namespace frictionlab::market {

int ScenarioTree::index_of(const std::string& id) const {
  for (int k = 0; k < num_nodes(); ++k)
    if (nodes[static_cast<std::size_t>(k)].id == id) return k;
  return -1;
}

BidAskProcess shrink(const BidAskProcess& spread, const Rational& eps) {
  BidAskProcess out;
  out.assets = spread.assets;
  out.box.reserve(spread.box.size());
  for (const auto& b : spread.box) out.box.push_back(geometry::shrink_box(b, eps));
  return out;
}

Strategy zero_strategy(const ScenarioTree& tree, Eigen::Index assets) {
  Strategy h;
  h.holding.assign(static_cast<std::size_t>(tree.num_nodes()), Vec::Zero(assets));
  return h;
}

ValidationReport validate(const ScenarioTree& tree, const BidAskProcess& spread) {
  auto reject = [](std::string msg) { return ValidationReport{false, std::move(msg)}; };
  if (tree.nodes.empty()) return reject("tree has no nodes");
  if (tree.nodes[0].parent != -1 || tree.nodes[0].depth != 0)
    return reject("node 0 must be the depth-0 root");
  for (int k = 1; k < tree.num_nodes(); ++k) {
    const auto& n = tree.nodes[static_cast<std::size_t>(k)];
    if (n.parent < 0 || n.parent >= tree.num_nodes())
      return reject("node '" + n.id + "' has no parent; single root required");
    if (n.parent >= k) return reject("node '" + n.id + "' precedes its parent");
    const auto& p = tree.nodes[static_cast<std::size_t>(n.parent)];
    if (n.depth != p.depth + 1) return reject("node '" + n.id + "' depth inconsistent with parent");
  }
  for (int k = 0; k < tree.num_nodes(); ++k) {
    const auto& n = tree.nodes[static_cast<std::size_t>(k)];
    for (int c : n.children) {
      if (c < 0 || c >= tree.num_nodes() || tree.nodes[static_cast<std::size_t>(c)].parent != k)
        return reject("node '" + n.id + "' has inconsistent child links");
    }
    if (n.children.empty() && n.depth != tree.horizon)
      return reject("leaf '" + n.id + "' at depth " + std::to_string(n.depth) +
                    " != horizon (ragged tree)");
    if (!n.children.empty() && n.depth >= tree.horizon)
      return reject("node '" + n.id + "' beyond the horizon has children");
  }
  if (spread.assets <= 0) return reject("asset count must be positive");
  if (static_cast<int>(spread.box.size()) != tree.num_nodes())
    return reject("spread must cover every node");
  for (int k = 0; k < tree.num_nodes(); ++k) {
    const auto& b = spread.box[static_cast<std::size_t>(k)];
    if (b.lo.size() != spread.assets || b.hi.size() != spread.assets)
      return reject("box at '" + tree.nodes[static_cast<std::size_t>(k)].id +
                    "' has wrong dimension");
    for (Eigen::Index j = 0; j < spread.assets; ++j) {
      if (!(b.lo(j) < b.hi(j)))
        return reject("degenerate spread at '" + tree.nodes[static_cast<std::size_t>(k)].id +
                      "' asset " + std::to_string(j) + ": efficient friction requires bid < ask");
      if (!(b.lo(j) > 0))
        return reject("nonpositive bid at '" + tree.nodes[static_cast<std::size_t>(k)].id +
                      "' asset " + std::to_string(j) +
                      ": prices are quoted in a numeraire, the exchange matrix needs bid > 0");
    }
  }
  return {};
}

Rational trade_cash_flow(const geometry::Box& prices, const Vec& from, const Vec& to) {
  Rational cash = 0;
  for (Eigen::Index j = 0; j < from.size(); ++j) {
    if (from(j) < to(j)) {
      cash += (from(j) - to(j)) * prices.hi(j);  // buy at the ask
    } else if (from(j) > to(j)) {
      cash += (from(j) - to(j)) * prices.lo(j);  // sell at the bid
    }
  }
  return cash;
}

std::vector<Rational> value(const ScenarioTree& tree, const BidAskProcess& spread,
                            const Strategy& h) {
  std::vector<Rational> leaf_value;
  std::vector<Rational> acc(static_cast<std::size_t>(tree.num_nodes()), Rational(0));
  const Vec zero = Vec::Zero(spread.assets);
  for (int k = 0; k < tree.num_nodes(); ++k) {
    const auto& n = tree.nodes[static_cast<std::size_t>(k)];
    const Vec& held = n.parent < 0 ? zero : h.at(n.parent);
    const Vec& next = tree.is_leaf(k) ? zero : h.at(k);
    const Rational prior = n.parent < 0 ? Rational(0) : acc[static_cast<std::size_t>(n.parent)];
    acc[static_cast<std::size_t>(k)] = prior + trade_cash_flow(spread.at(k), held, next);
  }
  for (int leaf : tree.leaves) leaf_value.push_back(acc[static_cast<std::size_t>(leaf)]);
  return leaf_value;
}

std::vector<Rational> frictionless_integral(const ScenarioTree& tree, const Strategy& h,
                                            const std::vector<Vec>& price) {
  std::vector<Rational> acc(static_cast<std::size_t>(tree.num_nodes()), Rational(0));
  for (int k = 1; k < tree.num_nodes(); ++k) {
    const auto& n = tree.nodes[static_cast<std::size_t>(k)];
    const Vec step = price[static_cast<std::size_t>(k)] - price[static_cast<std::size_t>(n.parent)];
    acc[static_cast<std::size_t>(k)] =
        acc[static_cast<std::size_t>(n.parent)] + h.at(n.parent).dot(step);
  }
  std::vector<Rational> out;
  for (int leaf : tree.leaves) out.push_back(acc[static_cast<std::size_t>(leaf)]);
  return out;
}

std::vector<Vec> SolvencyCone::generators() const {
  const Eigen::Index n = pi.rows();
  std::vector<Vec> gens;
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e(i) = 1;
    gens.push_back(std::move(e));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      Vec g = Vec::Zero(n);
      g(i) = pi(i, j);
      g(j) = -1;
      gens.push_back(std::move(g));
    }
  }
  return gens;
}

SolvencyCone cone_from_box(const geometry::Box& box) {
  const Eigen::Index d = box.dim();
  SolvencyCone cone;
  cone.pi = Mat::Zero(d + 1, d + 1);
  for (Eigen::Index i = 0; i <= d; ++i) cone.pi(i, i) = 1;
  for (Eigen::Index j = 0; j < d; ++j) {
    cone.pi(0, j + 1) = box.hi(j);            // pi^{0j} = ask
    cone.pi(j + 1, 0) = 1 / box.lo(j);        // 1/pi^{j0} = bid
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (i != j) cone.pi(i + 1, j + 1) = cone.pi(i + 1, 0) * cone.pi(0, j + 1);
    }
  }
  return cone;
}

bool rebalance_solvent(const SolvencyCone& cone, const geometry::Box& prices, const Vec& from,
                       const Vec& to) {
  const Eigen::Index d = from.size();
  Vec x(d + 1);
  x(0) = trade_cash_flow(prices, from, to);
  for (Eigen::Index j = 0; j < d; ++j) x(j + 1) = to(j) - from(j);

  // x in -K  iff  -x is a nonnegative combination of the generators
  const auto gens = cone.generators();
  const Eigen::Index n = static_cast<Eigen::Index>(gens.size());
  lp::LinearProgram prog;
  prog.objective = Vec::Zero(n);
  for (Eigen::Index k = 0; k <= d; ++k) {
    RowVec row(n);
    for (Eigen::Index i = 0; i < n; ++i) row(i) = gens[static_cast<std::size_t>(i)](k);
    prog.add_row(std::move(row), lp::Rel::eq, -x(k));
  }
  prog.lower.assign(static_cast<std::size_t>(n), Rational(0));
  prog.upper.resize(static_cast<std::size_t>(n));
  return std::holds_alternative<Vec>(lp::feasible_point(prog));
}

std::vector<bool> solvency_check(const ScenarioTree& tree, const std::vector<SolvencyCone>& cones,
                                 const BidAskProcess& spread, const Strategy& h) {
  std::vector<bool> ok(static_cast<std::size_t>(tree.num_nodes()), true);
  const Vec zero = Vec::Zero(spread.assets);
  for (int k = 0; k < tree.num_nodes(); ++k) {
    const auto& n = tree.nodes[static_cast<std::size_t>(k)];
    const Vec& held = n.parent < 0 ? zero : h.at(n.parent);
    const Vec& next = tree.is_leaf(k) ? zero : h.at(k);
    ok[static_cast<std::size_t>(k)] =
        rebalance_solvent(cones[static_cast<std::size_t>(k)], spread.at(k), held, next);
  }
  return ok;
}

}  // namespace frictionlab::market

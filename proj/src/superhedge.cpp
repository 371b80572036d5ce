#include "frictionlab/superhedge.hpp"

#include <algorithm>

namespace frictionlab::superhedge {

namespace {

using geometry::Polytope;

Vec lift(const Vec& s, const Rational& z) {
  Vec v(s.size() + 1);
  v.head(s.size()) = s;
  v(s.size()) = z;
  return v;
}

bool pair_lex_less(const std::pair<Vec, Rational>& a, const std::pair<Vec, Rational>& b) {
  if (a.first != b.first) return lex_less(a.first, b.first);
  return a.second < b.second;
}

}  // namespace

geometry::Polytope ConcavePL::domain() const {
  std::vector<Vec> pts;
  pts.reserve(support.size());
  for (const auto& [s, f] : support) pts.push_back(s);
  return geometry::hull(dim, pts);
}

std::optional<Rational> ConcavePL::value_at(const Vec& x) const {
  if (support.empty()) return std::nullopt;
  const Eigen::Index n = static_cast<Eigen::Index>(support.size());
  lp::LinearProgram prog;
  prog.sense = lp::Sense::maximize;
  prog.objective = Vec(n);
  for (Eigen::Index i = 0; i < n; ++i) prog.objective(i) = support[static_cast<std::size_t>(i)].second;
  RowVec ones = RowVec::Ones(n);
  prog.add_row(ones, lp::Rel::eq, 1);
  for (Eigen::Index k = 0; k < dim; ++k) {
    RowVec row(n);
    for (Eigen::Index i = 0; i < n; ++i) row(i) = support[static_cast<std::size_t>(i)].first(k);
    prog.add_row(std::move(row), lp::Rel::eq, x(k));
  }
  prog.lower.assign(static_cast<std::size_t>(n), Rational(0));
  prog.upper.resize(static_cast<std::size_t>(n));
  const auto out = lp::solve(prog);
  if (out.is_infeasible()) return std::nullopt;
  if (!out.is_optimal()) throw internal_error("concave_pl: evaluation lp unbounded");
  return out.optimal().value;
}

ConcavePL envelope_of(Eigen::Index dim, const std::vector<std::pair<Vec, Rational>>& pairs) {
  ConcavePL f;
  f.dim = dim;
  if (pairs.empty()) return f;
  Rational floor = pairs.front().second;
  for (const auto& [s, v] : pairs) floor = std::min(floor, v);
  floor -= 1;
  std::vector<Vec> pts;
  pts.reserve(2 * pairs.size());
  for (const auto& [s, v] : pairs) {
    pts.push_back(lift(s, v));
    pts.push_back(lift(s, floor));
  }
  const auto slab = geometry::hull(dim + 1, pts);
  for (const auto& v : slab.vertices) {
    if (v(dim) != floor) f.support.emplace_back(v.head(dim), v(dim));
  }
  std::sort(f.support.begin(), f.support.end(), pair_lex_less);
  return f;
}

std::vector<std::pair<Vec, Rational>> restrict_pairs(const ConcavePL& f,
                                                     const geometry::Polytope& p) {
  if (f.empty() || p.empty()) throw input_error("restrict_pairs: empty input");
  const Eigen::Index d = f.dim;

  Rational floor = f.support.front().second;
  for (const auto& [s, v] : f.support) floor = std::min(floor, v);
  floor -= 1;

  std::vector<Vec> pts;
  for (const auto& [s, v] : f.support) {
    pts.push_back(lift(s, v));
    pts.push_back(lift(s, floor));
  }
  const auto slab = geometry::hull(d + 1, pts);
  auto hs = geometry::facets(slab);
  for (const auto& h : geometry::facets(p)) {
    RowVec a = RowVec::Zero(d + 1);
    a.head(d) = h.normal;
    hs.push_back({std::move(a), h.offset});
  }
  std::vector<std::pair<Vec, Rational>> out;
  for (const auto& v : geometry::vertices_from_halfspaces(d + 1, hs)) {
    if (v(d) != floor) out.emplace_back(v.head(d), v(d));
  }
  if (out.empty()) throw internal_error("restrict_pairs: restriction lost the hypograph");
  std::sort(out.begin(), out.end(), pair_lex_less);
  return out;
}

BackwardData backward_f(const market::ScenarioTree& tree, const market::BidAskProcess& spread,
                        const support_sets::SupportSets& sets, const market::Claim& claim) {
  const Eigen::Index d = spread.assets;
  BackwardData bd;
  bd.f.assign(static_cast<std::size_t>(tree.num_nodes()), ConcavePL{d, {}});
  bd.pool.assign(static_cast<std::size_t>(tree.num_nodes()), {});

  for (int k = tree.num_nodes() - 1; k >= 0; --k) {
    if (tree.is_leaf(k)) {
      std::vector<std::pair<Vec, Rational>> pairs;
      for (const auto& corner : spread.at(k).corners())
        pairs.emplace_back(corner, claim.at(k));
      bd.f[static_cast<std::size_t>(k)] = envelope_of(d, pairs);
      continue;
    }
    std::vector<PooledPair> pool;
    for (int c : tree.nodes[static_cast<std::size_t>(k)].children) {
      const auto& sc = sets.at(c);
      const auto& fc = bd.f[static_cast<std::size_t>(c)];
      if (sc.empty() || fc.empty()) continue;
      std::vector<std::pair<Vec, Rational>> restricted;
      if (fc.domain() == sc) {
        restricted = fc.support;
      } else {
        restricted = restrict_pairs(fc, sc);
      }
      for (auto& [s, v] : restricted) pool.push_back({c, std::move(s), std::move(v)});
    }
    std::vector<std::pair<Vec, Rational>> untagged;
    untagged.reserve(pool.size());
    for (const auto& p : pool) untagged.emplace_back(p.point, p.value);
    bd.pool[static_cast<std::size_t>(k)] = std::move(pool);
    bd.f[static_cast<std::size_t>(k)] = envelope_of(d, untagged);
  }
  return bd;
}

PriceResult price(const market::ScenarioTree&, const market::BidAskProcess& spread,
                  const support_sets::SupportSets& sets, const BackwardData& bd) {
  PriceResult pr;
  if (sets.at(0).empty()) {
    pr.degenerate = true;
    return pr;
  }
  const auto& f0 = bd.f[0];
  if (f0.empty()) throw internal_error("price: nonempty root support but no value function");
  const Eigen::Index d = spread.assets;
  const Eigen::Index n = static_cast<Eigen::Index>(f0.support.size());

  lp::LinearProgram prog;
  prog.sense = lp::Sense::maximize;
  prog.objective = Vec(n);
  for (Eigen::Index i = 0; i < n; ++i) prog.objective(i) = f0.support[static_cast<std::size_t>(i)].second;
  RowVec ones = RowVec::Ones(n);
  prog.add_row(ones, lp::Rel::eq, 1);
  const auto& box = spread.at(0);
  for (Eigen::Index k = 0; k < d; ++k) {
    RowVec row(n);
    for (Eigen::Index i = 0; i < n; ++i) row(i) = f0.support[static_cast<std::size_t>(i)].first(k);
    prog.add_row(row, lp::Rel::ge, box.lo(k));
    prog.add_row(std::move(row), lp::Rel::le, box.hi(k));
  }
  prog.lower.assign(static_cast<std::size_t>(n), Rational(0));
  prog.upper.resize(static_cast<std::size_t>(n));

  auto out = lp::solve(prog);
  if (!out.is_optimal()) throw internal_error("price: hypograph lp not optimal");
  pr.price = out.optimal().value;

  // lexicographic refinement of the maximizer
  lp::LinearProgram fixed = prog;
  fixed.add_row(fixed.objective.transpose(), lp::Rel::eq, pr.price);
  pr.maximizer = Vec(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    lp::LinearProgram step = fixed;
    step.sense = lp::Sense::minimize;
    step.objective = Vec(n);
    for (Eigen::Index i = 0; i < n; ++i)
      step.objective(i) = f0.support[static_cast<std::size_t>(i)].first(k);
    const auto sout = lp::solve(step);
    if (!sout.is_optimal()) throw internal_error("price: lexicographic step failed");
    pr.maximizer(k) = sout.optimal().value;
    fixed.add_row(step.objective.transpose(), lp::Rel::eq, pr.maximizer(k));
  }
  return pr;
}

namespace {

struct ConditionalLp {
  Rational value;
  Vec strategy;
  Vec row_dual;  // one multiplier per pooled row
};

// min y s.t. y + H.(p - x) >= f(p) over the pooled rows, optionally with
// trade-direction bounds on H; the duals are a conditional martingale step.
ConditionalLp conditional_solve(const std::vector<PooledPair>& pool, const Vec& x,
                                const std::optional<Vec>& h_in, const geometry::Box* box,
                                const Vec* s_hat) {
  const Eigen::Index d = x.size();
  lp::LinearProgram prog;
  prog.sense = lp::Sense::minimize;
  prog.objective = Vec::Zero(1 + d);
  prog.objective(0) = 1;
  for (const auto& p : pool) {
    RowVec row = RowVec::Zero(1 + d);
    row(0) = 1;
    for (Eigen::Index j = 0; j < d; ++j) row(1 + j) = p.point(j) - x(j);
    prog.add_row(std::move(row), lp::Rel::ge, p.value);
  }
  prog.lower.assign(static_cast<std::size_t>(1 + d), std::nullopt);
  prog.upper.resize(static_cast<std::size_t>(1 + d));
  if (h_in) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if ((*s_hat)(j) == box->lo(j)) {
        prog.upper[static_cast<std::size_t>(1 + j)] = (*h_in)(j);
      } else if ((*s_hat)(j) == box->hi(j)) {
        prog.lower[static_cast<std::size_t>(1 + j)] = (*h_in)(j);
      } else {
        prog.lower[static_cast<std::size_t>(1 + j)] = (*h_in)(j);
        prog.upper[static_cast<std::size_t>(1 + j)] = (*h_in)(j);
      }
    }
  }
  const auto out = lp::solve(prog);
  if (!out.is_optimal()) throw internal_error("conditional lp not optimal");
  ConditionalLp res;
  res.value = out.optimal().value;
  res.strategy = out.optimal().x.tail(d);
  res.row_dual = out.optimal().dual.row_dual.head(static_cast<Eigen::Index>(pool.size()));
  return res;
}

// refine the direction-constrained optimum to the minimal-trade, then
// lexicographically smallest strategy
Vec refined_strategy(const std::vector<PooledPair>& pool, const Vec& x, const Vec& h_in,
                     const geometry::Box& box, const Vec& s_hat, const Rational& opt_value) {
  const Eigen::Index d = x.size();
  lp::LinearProgram prog;
  prog.sense = lp::Sense::minimize;
  prog.objective = Vec::Zero(1 + d);
  for (const auto& p : pool) {
    RowVec row = RowVec::Zero(1 + d);
    row(0) = 1;
    for (Eigen::Index j = 0; j < d; ++j) row(1 + j) = p.point(j) - x(j);
    prog.add_row(std::move(row), lp::Rel::ge, p.value);
  }
  prog.lower.assign(static_cast<std::size_t>(1 + d), std::nullopt);
  prog.upper.resize(static_cast<std::size_t>(1 + d));
  std::vector<int> dir(static_cast<std::size_t>(d), 0);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (s_hat(j) == box.lo(j)) {
      prog.upper[static_cast<std::size_t>(1 + j)] = h_in(j);
      dir[static_cast<std::size_t>(j)] = -1;
    } else if (s_hat(j) == box.hi(j)) {
      prog.lower[static_cast<std::size_t>(1 + j)] = h_in(j);
      dir[static_cast<std::size_t>(j)] = 1;
    } else {
      prog.lower[static_cast<std::size_t>(1 + j)] = h_in(j);
      prog.upper[static_cast<std::size_t>(1 + j)] = h_in(j);
    }
  }
  RowVec value_row = RowVec::Zero(1 + d);
  value_row(0) = 1;
  prog.add_row(std::move(value_row), lp::Rel::eq, opt_value);

  // minimal total trade within the direction cone
  RowVec trade = RowVec::Zero(1 + d);
  for (Eigen::Index j = 0; j < d; ++j) trade(1 + j) = Rational(dir[static_cast<std::size_t>(j)]);
  lp::LinearProgram step = prog;
  step.objective = trade.transpose();
  auto out = lp::solve(step);
  if (!out.is_optimal()) throw internal_error("strategy refinement failed");
  prog.add_row(trade, lp::Rel::eq, out.optimal().value);

  for (Eigen::Index j = 0; j < d; ++j) {
    lp::LinearProgram lex = prog;
    lex.objective = Vec::Zero(1 + d);
    lex.objective(1 + j) = 1;
    out = lp::solve(lex);
    if (!out.is_optimal()) throw internal_error("strategy lexicographic step failed");
    RowVec fix = RowVec::Zero(1 + d);
    fix(1 + j) = 1;
    prog.add_row(std::move(fix), lp::Rel::eq, out.optimal().value);
  }
  const auto final_point = lp::feasible_point(prog);
  if (!std::holds_alternative<Vec>(final_point))
    throw internal_error("strategy refinement lost feasibility");
  return std::get<Vec>(final_point).tail(d);
}

}  // namespace

Extraction extract(const market::ScenarioTree& tree, const market::BidAskProcess& spread,
                   const support_sets::SupportSets& sets, const BackwardData& bd,
                   const PriceResult& pr, const market::Claim& claim) {
  if (pr.degenerate) throw input_error("extract: degenerate price (no consistent price system)");
  const Eigen::Index d = spread.assets;
  const int n = tree.num_nodes();

  Extraction ex;
  ex.price_process.assign(static_cast<std::size_t>(n), Vec());
  ex.strategy = market::zero_strategy(tree, d);
  ex.on_support.assign(static_cast<std::size_t>(n), false);
  ex.value_fn.assign(static_cast<std::size_t>(n), std::nullopt);
  ex.charged_mass.assign(static_cast<std::size_t>(n), Rational(0));

  ex.price_process[0] = pr.maximizer;
  ex.on_support[0] = true;
  ex.value_fn[0] = pr.price;
  ex.charged_mass[0] = 1;

  for (int k = 0; k < n; ++k) {
    const auto& node = tree.nodes[static_cast<std::size_t>(k)];
    if (!ex.on_support[static_cast<std::size_t>(k)]) {
      // off the support chain: close any inherited position at the boundary
      // vertex (consistent liquidation), then park the price mid-spread
      const Vec held = node.parent < 0 ? Vec::Zero(d) : ex.strategy.at(node.parent);
      if (held != Vec::Zero(d)) {
        ex.price_process[static_cast<std::size_t>(k)] =
            support_sets::boundary_process(held, spread.at(k));
      } else {
        ex.price_process[static_cast<std::size_t>(k)] = spread.at(k).midpoint();
      }
      if (!tree.is_leaf(k))
        ex.strategy.holding[static_cast<std::size_t>(k)] = Vec::Zero(d);
      continue;
    }
    const Vec x = ex.price_process[static_cast<std::size_t>(k)];
    const Rational x_value = *ex.value_fn[static_cast<std::size_t>(k)];
    if (tree.is_leaf(k)) {
      if (x_value != claim.at(k))
        throw internal_error("extract: terminal value does not match the claim");
      continue;
    }
    const auto& pool = bd.pool[static_cast<std::size_t>(k)];
    if (pool.empty()) throw internal_error("extract: on-support node without children data");

    const Vec h_in = node.parent < 0 ? Vec::Zero(d) : ex.strategy.at(node.parent);

    // the unconstrained conditional problem carries the martingale duals
    const auto plain = conditional_solve(pool, x, std::nullopt, nullptr, nullptr);
    if (plain.value != x_value)
      throw internal_error("extract: conditional value disagrees with the backward sweep");
    {
      Rational total = 0;
      Vec bary = Vec::Zero(d);
      for (Eigen::Index i = 0; i < plain.row_dual.size(); ++i) {
        if (plain.row_dual(i) < 0) throw internal_error("extract: negative conditional dual");
        total += plain.row_dual(i);
        bary += plain.row_dual(i) * (pool[static_cast<std::size_t>(i)].point - x);
      }
      if (total != 1 || bary != Vec::Zero(d))
        throw internal_error("extract: conditional duals are not a martingale step");
    }

    // direction-consistent strategy at the same optimal value
    const auto constrained = conditional_solve(pool, x, h_in, &spread.at(k), &x);
    if (constrained.value != x_value)
      throw internal_error("extract: direction constraints changed the conditional price");
    const Vec h_next = refined_strategy(pool, x, h_in, spread.at(k), x, x_value);
    ex.strategy.holding[static_cast<std::size_t>(k)] = h_next;

    // children: dual-charged ones take the dual barycenter of their rows,
    // uncharged ones take the slack-minimizing hypograph point
    for (int c : node.children) {
      Rational mass = 0;
      Vec point = Vec::Zero(d);
      Rational value = 0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].child != c) continue;
        const Rational w = plain.row_dual(static_cast<Eigen::Index>(i));
        if (w == 0) continue;
        mass += w;
        point += w * pool[i].point;
        value += w * pool[i].value;
      }
      if (sets.at(c).empty()) {
        if (mass != 0) throw internal_error("extract: dual mass on an off-support child");
        continue;  // handled by the off-support branch above
      }
      ex.on_support[static_cast<std::size_t>(c)] = true;
      if (mass > 0) {
        const Vec z = point / mass;
        const Rational fz = x_value + h_next.dot(z - x);
        const auto check = bd.f[static_cast<std::size_t>(c)].value_at(z);
        if (!check || *check != fz)
          throw internal_error("extract: charged child value not tight");
        ex.price_process[static_cast<std::size_t>(c)] = z;
        ex.value_fn[static_cast<std::size_t>(c)] = fz;
        ex.charged_mass[static_cast<std::size_t>(c)] =
            ex.charged_mass[static_cast<std::size_t>(k)] * mass;
      } else {
        bool first = true;
        Rational best_slack;
        std::pair<Vec, Rational> best;
        for (const auto& p : pool) {
          if (p.child != c) continue;
          const Rational slack = x_value + h_next.dot(p.point - x) - p.value;
          if (slack < 0) throw internal_error("extract: negative slack at a child point");
          const bool better =
              first || slack < best_slack ||
              (slack == best_slack && pair_lex_less({p.point, p.value}, best));
          if (better) {
            best_slack = slack;
            best = {p.point, p.value};
            first = false;
          }
        }
        if (first) throw internal_error("extract: no hypograph point for an on-support child");
        ex.price_process[static_cast<std::size_t>(c)] = best.first;
        ex.value_fn[static_cast<std::size_t>(c)] = best.second;
      }
    }
  }

  // the superhedging inequality holds wherever the chain stayed finite
  const auto leaf_values = market::value(tree, spread, ex.strategy);
  for (std::size_t i = 0; i < tree.leaves.size(); ++i) {
    const int leaf = tree.leaves[i];
    if (!ex.on_support[static_cast<std::size_t>(leaf)]) continue;
    if (!(pr.price + leaf_values[i] >= claim.at(leaf)))
      throw internal_error("extract: superhedge inequality violated on the support");
  }
  return ex;
}

std::optional<Vec> CpsLpSolution::price_at(int node) const {
  const Rational& q = node_mass[static_cast<std::size_t>(node)];
  if (q == 0) return std::nullopt;
  return Vec(node_moment[static_cast<std::size_t>(node)] / q);
}

CpsLpOutcome solve_cps_lp(const market::ScenarioTree& tree, const market::BidAskProcess& spread,
                          const std::map<int, Rational>& leaf_objective) {
  const Eigen::Index d = spread.assets;
  const int n = tree.num_nodes();
  const Eigen::Index stride = 1 + d;
  const Eigen::Index nv = static_cast<Eigen::Index>(n) * stride;
  auto qvar = [&](int k) { return static_cast<Eigen::Index>(k) * stride; };
  auto uvar = [&](int k, Eigen::Index j) { return static_cast<Eigen::Index>(k) * stride + 1 + j; };

  lp::LinearProgram prog;
  prog.sense = lp::Sense::maximize;
  prog.objective = Vec::Zero(nv);
  for (const auto& [leaf, w] : leaf_objective) prog.objective(qvar(leaf)) = w;

  {
    RowVec row = RowVec::Zero(nv);
    row(qvar(0)) = 1;
    prog.add_row(std::move(row), lp::Rel::eq, 1);
  }
  for (int k = 0; k < n; ++k) {
    const auto& node = tree.nodes[static_cast<std::size_t>(k)];
    if (tree.is_leaf(k)) continue;
    RowVec mass = RowVec::Zero(nv);
    mass(qvar(k)) = 1;
    for (int c : node.children) mass(qvar(c)) = -1;
    prog.add_row(std::move(mass), lp::Rel::eq, 0);
    for (Eigen::Index j = 0; j < d; ++j) {
      // theta = q bid + u; conservation of moments across the children
      RowVec row = RowVec::Zero(nv);
      row(qvar(k)) = spread.at(k).lo(j);
      row(uvar(k, j)) = 1;
      for (int c : node.children) {
        row(qvar(c)) -= spread.at(c).lo(j);
        row(uvar(c, j)) -= 1;
      }
      prog.add_row(std::move(row), lp::Rel::eq, 0);
    }
  }
  for (int k = 0; k < n; ++k) {
    for (Eigen::Index j = 0; j < d; ++j) {
      RowVec row = RowVec::Zero(nv);
      row(uvar(k, j)) = 1;
      row(qvar(k)) = spread.at(k).lo(j) - spread.at(k).hi(j);
      prog.add_row(std::move(row), lp::Rel::le, 0);
    }
  }
  prog.lower.assign(static_cast<std::size_t>(nv), Rational(0));
  prog.upper.resize(static_cast<std::size_t>(nv));

  const auto out = lp::solve(prog);
  CpsLpOutcome res;
  if (out.is_infeasible()) {
    res.farkas = out.infeasible();
    return res;
  }
  if (!out.is_optimal()) throw internal_error("cps lp unbounded");
  CpsLpSolution sol;
  sol.objective = out.optimal().value;
  sol.node_mass.reserve(static_cast<std::size_t>(n));
  sol.node_moment.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const Rational q = out.optimal().x(qvar(k));
    Vec theta(d);
    for (Eigen::Index j = 0; j < d; ++j)
      theta(j) = q * spread.at(k).lo(j) + out.optimal().x(uvar(k, j));
    sol.node_mass.push_back(q);
    sol.node_moment.push_back(std::move(theta));
  }
  res.solution = std::move(sol);
  return res;
}

bool EfficientSupport::contains(int leaf) const {
  return std::find(leaves.begin(), leaves.end(), leaf) != leaves.end();
}

EfficientSupport omega_star(const market::ScenarioTree& tree,
                            const market::BidAskProcess& spread) {
  EfficientSupport support;
  std::map<int, Rational> zero;
  auto probe = solve_cps_lp(tree, spread, zero);
  if (!probe.solution) {
    support.farkas = probe.farkas;
    return support;
  }
  std::vector<int> undecided = tree.leaves;
  while (!undecided.empty()) {
    std::map<int, Rational> weights;
    for (int leaf : undecided) weights[leaf] = 1;
    const auto out = solve_cps_lp(tree, spread, weights);
    if (!out.solution) throw internal_error("omega_star: feasibility lost");
    if (out.solution->objective == 0) break;  // every remaining leaf is null
    std::vector<int> rest;
    for (int leaf : undecided) {
      const Rational q = out.solution->node_mass[static_cast<std::size_t>(leaf)];
      if (q > 0) {
        support.witness_mass[leaf] = q;
      } else {
        rest.push_back(leaf);
      }
    }
    if (rest.size() == undecided.size())
      throw internal_error("omega_star: positive objective charged no leaf");
    undecided = std::move(rest);
  }
  for (int leaf : tree.leaves)
    if (support.witness_mass.count(leaf)) support.leaves.push_back(leaf);
  return support;
}

Rational max_leaf_mass(const market::ScenarioTree& tree, const market::BidAskProcess& spread,
                       int leaf) {
  std::map<int, Rational> weights;
  weights[leaf] = 1;
  const auto out = solve_cps_lp(tree, spread, weights);
  if (!out.solution) return 0;
  return out.solution->objective;
}

std::optional<OraclePrice> oracle_price(const market::ScenarioTree& tree,
                                        const market::BidAskProcess& spread,
                                        const market::Claim& claim) {
  const auto out = solve_cps_lp(tree, spread, claim.payoff);
  if (!out.solution) return std::nullopt;
  OraclePrice oracle;
  oracle.value = out.solution->objective;
  oracle.optimizer = *out.solution;
  return oracle;
}

SuperhedgeSolution solve(const market::ScenarioTree& tree, const market::BidAskProcess& spread,
                         const market::Claim& claim) {
  if (const auto report = market::validate(tree, spread); !report.ok)
    throw input_error("superhedge: " + report.message);
  for (int leaf : tree.leaves) {
    if (!claim.payoff.count(leaf)) throw input_error("superhedge: claim missing a leaf payoff");
  }
  const auto sets = support_sets::compute(tree, spread);
  const auto bd = backward_f(tree, spread, sets, claim);

  SuperhedgeSolution sol;
  sol.price = price(tree, spread, sets, bd);
  sol.support = omega_star(tree, spread);
  sol.oracle = oracle_price(tree, spread, claim);
  if (!sol.price.degenerate) {
    sol.extraction = extract(tree, spread, sets, bd, sol.price, claim);
    if (!sol.oracle) throw internal_error("superhedge: price finite but no price system");
    sol.duality_gap = sol.price.price - sol.oracle->value;
  } else {
    if (sol.oracle) throw internal_error("superhedge: degenerate price with a price system");
    if (!sol.support.empty())
      throw internal_error("superhedge: degenerate price with nonempty efficient support");
  }
  return sol;
}

}  // namespace frictionlab::superhedge

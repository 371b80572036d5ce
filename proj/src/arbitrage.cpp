#include "frictionlab/arbitrage.hpp"

#include <algorithm>

#include "frictionlab/lp.hpp"

namespace frictionlab::arbitrage {

namespace {

using geometry::Box;
using geometry::Polytope;

Rational pow2_inv(std::size_t k) {
  Rational r = 1;
  for (std::size_t i = 0; i < k; ++i) r /= 2;
  return r;
}

Rational margin_at(const Rational& delta, int depth) {
  Rational m = delta;
  for (int i = 0; i < depth; ++i) m /= 2;
  return m;
}

std::vector<Rational> node_mass_from_leaves(const market::ScenarioTree& tree,
                                            const std::vector<Rational>& leaf_mass) {
  std::vector<Rational> q(static_cast<std::size_t>(tree.num_nodes()), Rational(0));
  for (std::size_t i = 0; i < tree.leaves.size(); ++i)
    q[static_cast<std::size_t>(tree.leaves[i])] = leaf_mass[i];
  for (int k = tree.num_nodes() - 1; k >= 1; --k)
    q[static_cast<std::size_t>(tree.nodes[static_cast<std::size_t>(k)].parent)] +=
        q[static_cast<std::size_t>(k)];
  return q;
}

}  // namespace

std::string action_name(Action a) {
  switch (a) {
    case Action::none: return "none";
    case Action::open: return "open";
    case Action::hold: return "hold";
    case Action::liquidate: return "liquidate";
    case Action::rebalance_case1: return "rebalance-case-1";
    case Action::rebalance_case2: return "rebalance-case-2";
  }
  return "?";
}

std::size_t resolution_bound(const market::ScenarioTree& tree,
                             const market::BidAskProcess& spread) {
  std::size_t bits = 0;
  for (const auto& b : spread.box) {
    for (Eigen::Index j = 0; j < spread.assets; ++j) bits += bit_size(b.lo(j)) + bit_size(b.hi(j));
  }
  return bits + static_cast<std::size_t>(tree.horizon) + 4;
}

std::optional<ConsistentPriceSystem> strict_cps(const market::ScenarioTree& tree,
                                                const market::BidAskProcess& spread,
                                                const Rational& eps) {
  const auto shrunk = market::shrink(spread, eps);
  const auto sets = support_sets::compute(tree, shrunk);
  if (sets.at(0).empty()) return std::nullopt;

  ConsistentPriceSystem cps;
  cps.shrink_eps = eps;
  cps.price.assign(static_cast<std::size_t>(tree.num_nodes()), Vec());
  std::vector<Rational> mass(static_cast<std::size_t>(tree.num_nodes()), Rational(0));

  mass[0] = 1;
  cps.price[0] = geometry::relative_interior_point(sets.at(0));

  // nodes are parent-first, so a single pass is a forward sweep
  for (int k = 0; k < tree.num_nodes(); ++k) {
    const auto& node = tree.nodes[static_cast<std::size_t>(k)];
    if (mass[static_cast<std::size_t>(k)] == 0) continue;  // filled with midpoints below
    if (tree.is_leaf(k)) continue;

    const auto weights = geometry::caratheodory_weights(cps.price[static_cast<std::size_t>(k)],
                                                        sets.hull_at(k));
    if (!weights) throw internal_error("strict_cps: support point lost its representation");

    // merge representing vertices child by child; each hull vertex is a
    // vertex of at least one child's support set
    std::vector<Rational> child_mass(node.children.size(), Rational(0));
    std::vector<Vec> child_point(node.children.size(), Vec::Zero(spread.assets));
    for (const auto& [v, w] : *weights) {
      std::size_t owner = node.children.size();
      for (std::size_t ci = 0; ci < node.children.size(); ++ci) {
        const auto& verts = sets.at(node.children[ci]).vertices;
        if (std::find(verts.begin(), verts.end(), v) != verts.end()) {
          owner = ci;
          break;
        }
      }
      if (owner == node.children.size())
        throw internal_error("strict_cps: hull vertex not owned by any child");
      child_mass[owner] += w;
      child_point[owner] += w * v;
    }
    for (std::size_t ci = 0; ci < node.children.size(); ++ci) {
      const int c = node.children[ci];
      if (child_mass[ci] > 0) {
        mass[static_cast<std::size_t>(c)] = mass[static_cast<std::size_t>(k)] * child_mass[ci];
        cps.price[static_cast<std::size_t>(c)] = child_point[ci] / child_mass[ci];
      } else {
        mass[static_cast<std::size_t>(c)] = 0;
        cps.price[static_cast<std::size_t>(c)] = shrunk.at(c).midpoint();
      }
    }
  }
  // zero-mass nodes carry the shrunk-box midpoint: interior, mass-free
  for (int k = 0; k < tree.num_nodes(); ++k) {
    if (cps.price[static_cast<std::size_t>(k)].size() == 0)
      cps.price[static_cast<std::size_t>(k)] = shrunk.at(k).midpoint();
  }
  for (int leaf : tree.leaves) cps.leaf_mass.push_back(mass[static_cast<std::size_t>(leaf)]);

  std::string why;
  if (!verify_cps(tree, spread, cps, &why))
    throw internal_error("strict_cps: constructed system failed verification: " + why);
  return cps;
}

namespace {

// Trade-execution price vector for moving from `from` to `to` (buys at the
// ask, sells at the bid); ties resolved toward where a scale-up of `to`
// would land.
Vec extension_prices(const Box& box, const Vec& from, const Vec& to) {
  Vec p(from.size());
  for (Eigen::Index j = 0; j < from.size(); ++j) {
    if (from(j) < to(j)) {
      p(j) = box.hi(j);
    } else if (from(j) > to(j)) {
      p(j) = box.lo(j);
    } else {
      p(j) = to(j) > 0 ? box.hi(j) : box.lo(j);
    }
  }
  return p;
}

struct SweepState {
  enum class Phase { pristine, open, closed };
  Phase phase = Phase::pristine;
  Vec holding;    // position carried into the node
  Rational value;  // value after the parent's rebalance
};

// f^eta realization: for a fixed trade-direction pattern the execution
// prices are constant, so admissible next positions form a polyhedron and a
// minimal-trade representative is an LP away.
std::optional<Vec> pattern_rebalance(const Box& box, const Polytope& hull, const Vec& h_in,
                                     const Rational& v_prev, const Rational& margin) {
  const Eigen::Index d = h_in.size();
  std::vector<int> pattern(static_cast<std::size_t>(d), -1);
  std::vector<std::vector<int>> patterns;
  auto gen = [&](auto&& self, Eigen::Index j) -> void {
    if (j == d) {
      patterns.push_back(pattern);
      return;
    }
    for (int s : {0, 1, -1}) {
      pattern[static_cast<std::size_t>(j)] = s;
      self(self, j + 1);
    }
  };
  gen(gen, 0);
  std::stable_sort(patterns.begin(), patterns.end(),
                   [](const std::vector<int>& a, const std::vector<int>& b) {
                     int na = 0, nb = 0;
                     for (int x : a) na += x != 0;
                     for (int x : b) nb += x != 0;
                     return na < nb;
                   });

  for (const auto& pat : patterns) {
    Vec price(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      const int s = pat[static_cast<std::size_t>(j)];
      price(j) = s > 0 ? box.hi(j) : box.lo(j);
    }
    lp::LinearProgram prog;
    prog.sense = lp::Sense::minimize;
    prog.objective = Vec::Zero(d);
    for (Eigen::Index j = 0; j < d; ++j)
      prog.objective(j) = Rational(pat[static_cast<std::size_t>(j)]);
    // value after trading at the pattern prices plus the next-step invariant
    const Rational base = v_prev + h_in.dot(price);
    for (const auto& s : hull.vertices) {
      RowVec row(d);
      for (Eigen::Index j = 0; j < d; ++j) row(j) = s(j) - price(j);
      prog.add_row(std::move(row), lp::Rel::ge, margin - base);
    }
    prog.lower.assign(static_cast<std::size_t>(d), std::nullopt);
    prog.upper.resize(static_cast<std::size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j) {
      const int s = pat[static_cast<std::size_t>(j)];
      if (s > 0) {
        prog.lower[static_cast<std::size_t>(j)] = h_in(j);
      } else if (s < 0) {
        prog.upper[static_cast<std::size_t>(j)] = h_in(j);
      } else {
        prog.lower[static_cast<std::size_t>(j)] = h_in(j);
        prog.upper[static_cast<std::size_t>(j)] = h_in(j);
      }
    }
    const auto out = lp::solve(prog);
    if (out.is_optimal()) return out.optimal().x;
    if (out.is_unbounded()) {
      // any feasible point will do; probe feasibility explicitly
      lp::LinearProgram probe = prog;
      probe.objective = Vec::Zero(d);
      const auto p = lp::feasible_point(probe);
      if (std::holds_alternative<Vec>(p)) return std::get<Vec>(p);
    }
  }
  return std::nullopt;
}

}  // namespace

ArbitrageCertificate construct_arbitrage(const market::ScenarioTree& tree,
                                         const market::BidAskProcess& spread, const Rational& eps,
                                         const Rational& delta) {
  if (delta <= 0) throw input_error("construct_arbitrage: delta must be positive");
  const auto shrunk = market::shrink(spread, eps);
  const auto sets = support_sets::compute(tree, shrunk);
  if (!sets.at(0).empty())
    throw input_error(
        "construct_arbitrage: the root support set is nonempty at this shrink; "
        "a strictly consistent price system exists instead");

  const Eigen::Index d = spread.assets;
  ArbitrageCertificate cert;
  cert.shrink_eps = eps;
  cert.delta = delta;
  cert.strategy = market::zero_strategy(tree, d);
  cert.action.assign(static_cast<std::size_t>(tree.num_nodes()), Action::none);

  std::vector<SweepState> state(static_cast<std::size_t>(tree.num_nodes()));

  for (int k = 0; k < tree.num_nodes(); ++k) {
    const auto& node = tree.nodes[static_cast<std::size_t>(k)];
    const int t = node.depth;
    const Box& box = shrunk.at(k);
    const Polytope& support = sets.at(k);
    const Polytope& hull = sets.hull_at(k);

    SweepState st;
    if (node.parent < 0) {
      st.phase = SweepState::Phase::pristine;
      st.holding = Vec::Zero(d);
      st.value = 0;
    } else {
      const auto& ps = state[static_cast<std::size_t>(node.parent)];
      st.phase = ps.phase;
      st.holding = cert.strategy.at(node.parent);
      st.value = ps.value;
    }

    Vec h_next = Vec::Zero(d);
    switch (st.phase) {
      case SweepState::Phase::closed:
        break;

      case SweepState::Phase::pristine: {
        if (!support.empty())
          throw internal_error("construct_arbitrage: pristine node with nonempty support set");
        if (hull.empty()) {
          if (tree.is_leaf(k))
            throw internal_error("construct_arbitrage: no opening reached a leaf");
          break;  // wait further down the path
        }
        // A-event: the children's hull separates from the whole box
        const Rational margin = margin_at(delta, t);
        const auto sep =
            geometry::separating_functional(Polytope{d, box.corners()}, hull, margin);
        if (!sep) throw internal_error("construct_arbitrage: opening separation failed");
        h_next = sep->functional.transpose();
        st.value = market::trade_cash_flow(box, Vec::Zero(d), h_next);
        for (const auto& s : hull.vertices) {
          if (!(st.value + h_next.dot(s) >= margin))
            throw internal_error("construct_arbitrage: opening margin violated");
        }
        st.phase = SweepState::Phase::open;
        cert.action[static_cast<std::size_t>(k)] = Action::open;
        cert.opening_nodes.push_back(k);
        break;
      }

      case SweepState::Phase::open: {
        const Rational margin_in = margin_at(delta, t - 1);
        const Rational margin_out = margin_at(delta, t);
        for (const auto& s : support.vertices) {
          if (!(st.value + st.holding.dot(s) >= margin_in))
            throw internal_error("construct_arbitrage: induction margin violated");
        }
        const Vec liq = support_sets::boundary_process(st.holding, box);
        const Rational liq_value = st.value + st.holding.dot(liq);

        if ((!support.empty() && geometry::contains(support, liq)) || liq_value > 0) {
          if (!(liq_value > 0))
            throw internal_error("construct_arbitrage: liquidation value not positive");
          st.value = liq_value;
          st.phase = SweepState::Phase::closed;
          cert.action[static_cast<std::size_t>(k)] = Action::liquidate;
          break;
        }
        if (tree.is_leaf(k))
          throw internal_error("construct_arbitrage: leaf reached with an unprofitable position");
        if (hull.empty()) {
          h_next = st.holding;  // nothing to aim at yet; keep the position
          cert.action[static_cast<std::size_t>(k)] = Action::hold;
          break;
        }
        // try holding first: margins halve while the value does not decay
        bool hold_ok = true;
        for (const auto& s : hull.vertices) {
          if (!(st.value + st.holding.dot(s) >= margin_out)) {
            hold_ok = false;
            break;
          }
        }
        if (hold_ok) {
          h_next = st.holding;
          cert.action[static_cast<std::size_t>(k)] = Action::hold;
          break;
        }

        // B-event: rebalance along a functional separating the loss vertices
        // from the children's hull
        std::vector<Vec> loss;
        for (const auto& y : box.corners()) {
          if (st.value + st.holding.dot(y) <= 0) loss.push_back(y);
        }
        if (loss.empty())
          throw internal_error("construct_arbitrage: boundary vertex missing from loss set");
        const Polytope loss_poly{d, loss};
        const auto sep = geometry::separating_functional(loss_poly, hull, 1);
        if (!sep) throw internal_error("construct_arbitrage: rebalance separation failed");
        const Vec dir = sep->functional.transpose();

        const Vec dir_prices = extension_prices(box, st.holding, dir);
        const bool case1 =
            std::find(loss.begin(), loss.end(), dir_prices) != loss.end();
        Vec candidate;
        Action chosen = case1 ? Action::rebalance_case1 : Action::rebalance_case2;
        if (case1) {
          const Rational need =
              (-st.value - st.holding.dot(dir_prices) + margin_out);  // scaled by 1/eps' = 1
          const Rational alpha = std::max(need, Rational(1) + margin_out);
          candidate = alpha * dir;
        } else {
          const Rational slack = Rational(1) - dir.dot(dir_prices - liq);
          Rational alpha = 1;
          if (slack < 0) {
            const Rational bound = margin_out / -slack;
            alpha = std::min(bound, Rational(1));
          }
          candidate = alpha * dir;
        }
        auto invariant_holds = [&](const Vec& h) {
          const Rational value_after = st.value + market::trade_cash_flow(box, st.holding, h);
          for (const auto& s : hull.vertices)
            if (!(value_after + h.dot(s) >= margin_out)) return false;
          return true;
        };
        if (invariant_holds(candidate)) {
          h_next = candidate;
        } else {
          const auto fallback = pattern_rebalance(box, hull, st.holding, st.value, margin_out);
          if (!fallback || !invariant_holds(*fallback))
            throw internal_error(
                "construct_arbitrage: rebalance failed in both the direct construction and the "
                "sign-pattern enumeration");
          h_next = *fallback;
          chosen = std::find(loss.begin(), loss.end(),
                             extension_prices(box, st.holding, *fallback)) != loss.end()
                       ? Action::rebalance_case1
                       : Action::rebalance_case2;
          ++cert.rebalance_fallbacks;
        }
        st.value += market::trade_cash_flow(box, st.holding, h_next);
        cert.action[static_cast<std::size_t>(k)] = chosen;
        break;
      }
    }

    if (!tree.is_leaf(k)) cert.strategy.holding[static_cast<std::size_t>(k)] = h_next;
    state[static_cast<std::size_t>(k)] = std::move(st);
  }

  // normalize so the largest traded position is +-1; the certificate is
  // positively homogeneous in the strategy
  Rational scale = 0;
  for (int k = 0; k < tree.num_nodes(); ++k) {
    if (tree.is_leaf(k)) continue;
    const Vec& h = cert.strategy.at(k);
    for (Eigen::Index j = 0; j < d; ++j) {
      const Rational a = h(j) < 0 ? Rational(-h(j)) : h(j);
      if (a > scale) scale = a;
    }
  }
  if (scale == 0) throw internal_error("construct_arbitrage: empty strategy");
  for (auto& h : cert.strategy.holding) h /= scale;

  cert.leaf_value_shrunk = market::value(tree, shrunk, cert.strategy);
  cert.leaf_value_original = market::value(tree, spread, cert.strategy);
  for (const auto& v : cert.leaf_value_shrunk) {
    if (!(v > 0)) throw internal_error("construct_arbitrage: nonpositive terminal value");
  }
  return cert;
}

namespace {

std::vector<bool> emptiness_pattern(const market::ScenarioTree& tree,
                                    const market::BidAskProcess& spread, const Rational& eps) {
  const auto sets = support_sets::compute(tree, market::shrink(spread, eps));
  std::vector<bool> pattern;
  pattern.reserve(static_cast<std::size_t>(tree.num_nodes()));
  for (int k = 0; k < tree.num_nodes(); ++k) pattern.push_back(sets.at(k).empty());
  return pattern;
}

}  // namespace

RnaVerdict rna_verdict(const market::ScenarioTree& tree, const market::BidAskProcess& spread,
                       const Rational& delta) {
  if (const auto report = market::validate(tree, spread); !report.ok)
    throw input_error("rna_verdict: " + report.message);

  RnaVerdict verdict;
  verdict.resolution_bound_k = resolution_bound(tree, spread);

  const auto closed_sets = support_sets::compute(tree, spread);
  const bool closed_root_empty = closed_sets.at(0).empty();

  auto probe = [&](std::size_t k) {
    const Rational eps = pow2_inv(k);
    const auto sets = support_sets::compute(tree, market::shrink(spread, eps));
    const bool exists = !sets.at(0).empty();
    verdict.probes.push_back({eps, exists});
    return exists;
  };

  std::optional<std::size_t> success_k;
  if (!closed_root_empty) {
    if (probe(2)) {
      success_k = 2;
    } else if (probe(verdict.resolution_bound_k)) {
      // bisect for the coarsest shrink that still admits a strict system
      std::size_t lo = 2, hi = verdict.resolution_bound_k;
      while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (probe(mid)) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      success_k = hi;
      verdict.resolution_sensitive = true;
    }
  }

  if (success_k) {
    verdict.robust_no_arbitrage = true;
    verdict.cps = strict_cps(tree, spread, pow2_inv(*success_k));
    if (!verdict.cps) throw internal_error("rna_verdict: probe succeeded but construction failed");
    return verdict;
  }

  // No strict system at any tested shrink.  Pick a witness shrink whose
  // per-node emptiness pattern matches the finest structure seen, so the
  // certificate's opening times reflect the limit behaviour rather than an
  // artifact of a coarse shrink.
  std::vector<bool> reference;
  if (closed_root_empty) {
    std::vector<std::vector<bool>> pat;
    for (std::size_t k = 2; k <= 6; ++k) pat.push_back(emptiness_pattern(tree, spread, pow2_inv(k)));
    reference = pat.back();
    for (std::size_t i = 0; i + 1 < pat.size(); ++i) {
      if (pat[i] == pat[i + 1]) {
        reference = pat[i];
        break;
      }
    }
  } else {
    reference = emptiness_pattern(tree, spread, pow2_inv(verdict.resolution_bound_k));
  }
  std::size_t witness_k = verdict.resolution_bound_k;
  for (std::size_t k = 2; k <= std::min<std::size_t>(8, verdict.resolution_bound_k); ++k) {
    if (emptiness_pattern(tree, spread, pow2_inv(k)) == reference) {
      witness_k = k;
      break;
    }
  }
  const Rational witness_eps = pow2_inv(witness_k);
  bool recorded = false;
  for (const auto& p : verdict.probes) recorded = recorded || p.eps == witness_eps;
  if (!recorded) verdict.probes.push_back({witness_eps, false});
  verdict.robust_no_arbitrage = false;
  verdict.certificate = construct_arbitrage(tree, spread, witness_eps, delta);
  return verdict;
}

bool verify_cps(const market::ScenarioTree& tree, const market::BidAskProcess& spread,
                const ConsistentPriceSystem& cps, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (cps.leaf_mass.size() != tree.leaves.size()) return fail("leaf mass vector size");
  if (cps.price.size() != static_cast<std::size_t>(tree.num_nodes())) return fail("price size");
  Rational total = 0;
  for (const auto& q : cps.leaf_mass) {
    if (q < 0) return fail("negative leaf mass");
    total += q;
  }
  if (total != 1) return fail("leaf masses do not sum to one");

  const auto shrunk = market::shrink(spread, cps.shrink_eps);
  for (int k = 0; k < tree.num_nodes(); ++k) {
    const Vec& s = cps.price[static_cast<std::size_t>(k)];
    if (s.size() != spread.assets) return fail("price dimension at node");
    if (!spread.at(k).strictly_contains(s))
      return fail("price not strictly inside the spread at '" +
                  tree.nodes[static_cast<std::size_t>(k)].id + "'");
    if (!shrunk.at(k).contains(s))
      return fail("price outside the recorded shrink margin at '" +
                  tree.nodes[static_cast<std::size_t>(k)].id + "'");
  }
  const auto q = node_mass_from_leaves(tree, cps.leaf_mass);
  for (int k = 0; k < tree.num_nodes(); ++k) {
    if (tree.is_leaf(k)) continue;
    Vec expect = q[static_cast<std::size_t>(k)] * cps.price[static_cast<std::size_t>(k)];
    Vec got = Vec::Zero(spread.assets);
    for (int c : tree.nodes[static_cast<std::size_t>(k)].children)
      got += q[static_cast<std::size_t>(c)] * cps.price[static_cast<std::size_t>(c)];
    if (got != expect)
      return fail("martingale identity fails at '" + tree.nodes[static_cast<std::size_t>(k)].id +
                  "'");
  }
  return true;
}

bool verify_arbitrage(const market::ScenarioTree& tree, const market::BidAskProcess& spread,
                      const ArbitrageCertificate& cert, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (!(cert.shrink_eps > 0 && cert.shrink_eps < Rational(1, 2))) return fail("bad shrink eps");
  for (int k = 0; k < tree.num_nodes(); ++k) {
    const Vec& h = cert.strategy.at(k);
    if (h.size() != spread.assets) return fail("strategy dimension");
    if (tree.is_leaf(k) && h != Vec::Zero(spread.assets))
      return fail("terminal position not closed");
  }
  const auto shrunk = market::shrink(spread, cert.shrink_eps);
  const auto values = market::value(tree, shrunk, cert.strategy);
  if (values.size() != cert.leaf_value_shrunk.size()) return fail("leaf value size");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != cert.leaf_value_shrunk[i]) return fail("recorded shrunk value mismatch");
    if (!(values[i] > 0))
      return fail("terminal value not positive at leaf '" +
                  tree.nodes[static_cast<std::size_t>(tree.leaves[i])].id + "'");
  }
  const auto original = market::value(tree, spread, cert.strategy);
  for (std::size_t i = 0; i < original.size(); ++i) {
    if (original[i] != cert.leaf_value_original[i]) return fail("recorded original value mismatch");
  }
  return true;
}

bool verify_verdict(const market::ScenarioTree& tree, const market::BidAskProcess& spread,
                    const RnaVerdict& verdict, std::string* why) {
  if (verdict.cps.has_value() == verdict.certificate.has_value()) {
    if (why) *why = "verdict must carry exactly one certificate";
    return false;
  }
  if (verdict.robust_no_arbitrage != verdict.cps.has_value()) {
    if (why) *why = "verdict tag disagrees with its certificate";
    return false;
  }
  if (verdict.cps) return verify_cps(tree, spread, *verdict.cps, why);
  return verify_arbitrage(tree, spread, *verdict.certificate, why);
}

}  // namespace frictionlab::arbitrage

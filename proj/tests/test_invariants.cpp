// Cross-module property tests: the structural facts the engine's
// constructions rely on, exercised on seeded random markets.

#include <doctest.h>

#include "frictionlab/fuzz.hpp"
#include "frictionlab/market_io.hpp"
#include "frictionlab/superhedge.hpp"
#include "test_fixtures.hpp"

using namespace frictionlab;
using namespace frictionlab::fixtures;

namespace {

std::vector<market::SolvencyCone> cones_of(const market::BidAskProcess& spread) {
  std::vector<market::SolvencyCone> cones;
  for (const auto& b : spread.box) cones.push_back(market::cone_from_box(b));
  return cones;
}

}  // namespace

TEST_CASE("engine strategies are always self-financing") {
  fuzz::GenOptions opt;
  opt.max_nodes = 16;
  for (int i = 0; i < 8; ++i) {
    fuzz::Rng rng(fuzz::mix_seed(0xF00DULL, static_cast<std::uint64_t>(i)));
    const auto m = fuzz::random_market(rng, opt);
    const auto cones = cones_of(m.spread);

    const auto verdict = arbitrage::rna_verdict(m.tree, m.spread);
    if (verdict.certificate) {
      const auto shrunk = market::shrink(m.spread, verdict.certificate->shrink_eps);
      for (bool ok :
           market::solvency_check(m.tree, cones_of(shrunk), shrunk, verdict.certificate->strategy))
        CHECK(ok);
    }

    const auto claim = fuzz::random_claim(rng, m.tree);
    const auto sol = superhedge::solve(m.tree, m.spread, claim);
    if (sol.extraction) {
      for (bool ok : market::solvency_check(m.tree, cones, m.spread, sol.extraction->strategy))
        CHECK(ok);
    }
  }
}

TEST_CASE("root support vertices admit convex representations over the children hull") {
  fuzz::GenOptions opt;
  opt.max_nodes = 14;
  for (int i = 0; i < 10; ++i) {
    fuzz::Rng rng(fuzz::mix_seed(0xCA7ULL, static_cast<std::uint64_t>(i)));
    const auto m = fuzz::random_market(rng, opt);
    const auto sets = support_sets::compute(m.tree, m.spread);
    if (sets.at(0).empty()) continue;
    for (const auto& v : sets.at(0).vertices) {
      const auto w = geometry::caratheodory_weights(v, sets.hull_at(0));
      REQUIRE(w.has_value());
      Rational total = 0;
      Vec recon = Vec::Zero(m.spread.assets);
      for (const auto& [p, weight] : *w) {
        CHECK(weight > 0);
        total += weight;
        recon += weight * p;
      }
      CHECK(total == 1);
      CHECK(recon == v);
      CHECK(w->size() <= static_cast<std::size_t>(m.spread.assets) + 1);
    }
  }
}

TEST_CASE("value function structure on random markets") {
  fuzz::GenOptions opt;
  opt.max_nodes = 14;
  opt.max_horizon = 3;
  for (int i = 0; i < 8; ++i) {
    fuzz::Rng rng(fuzz::mix_seed(0xBEEFULL, static_cast<std::uint64_t>(i)));
    const auto m = fuzz::random_market(rng, opt);
    const auto claim = fuzz::random_claim(rng, m.tree);
    const auto sets = support_sets::compute(m.tree, m.spread);
    const auto bd = superhedge::backward_f(m.tree, m.spread, sets, claim);

    for (int k = 0; k < m.tree.num_nodes(); ++k) {
      const auto& f = bd.f[static_cast<std::size_t>(k)];
      if (f.empty()) continue;

      // no stored pair lies strictly below the envelope of the others
      for (std::size_t drop = 0; drop < f.support.size(); ++drop) {
        std::vector<std::pair<Vec, Rational>> rest;
        for (std::size_t i2 = 0; i2 < f.support.size(); ++i2)
          if (i2 != drop) rest.push_back(f.support[i2]);
        if (rest.empty()) continue;
        const auto env = superhedge::envelope_of(m.spread.assets, rest);
        const auto at = env.value_at(f.support[drop].first);
        if (at) CHECK(*at <= f.support[drop].second);
      }

      // effective domain equals the hull of the pooled children points
      if (!m.tree.is_leaf(k)) {
        std::vector<Vec> pooled;
        for (const auto& p : bd.pool[static_cast<std::size_t>(k)]) pooled.push_back(p.point);
        CHECK(f.domain() == geometry::hull(m.spread.assets, pooled));
      }

      // support sets live inside the effective domain
      if (!sets.at(k).empty() && !m.tree.is_leaf(k)) {
        for (const auto& v : sets.at(k).vertices) CHECK(geometry::contains(f.domain(), v));
      }
    }
  }
}

TEST_CASE("subgradient inequality at the optimal strategies") {
  const auto m = binomial();
  market::Claim claim;
  claim.payoff[m.tree.leaves[0]] = 1;
  claim.payoff[m.tree.leaves[1]] = 0;
  const auto sets = support_sets::compute(m.tree, m.spread);
  const auto bd = superhedge::backward_f(m.tree, m.spread, sets, claim);
  const auto pr = superhedge::price(m.tree, m.spread, sets, bd);
  const auto ex = superhedge::extract(m.tree, m.spread, sets, bd, pr, claim);

  // F_0(s) <= F_0(x) + H.(s - x) for the optimal H at the maximizer
  const auto& f0 = bd.f[0];
  const Vec h = ex.strategy.at(0);
  for (const auto& [s, fs] : f0.support) {
    CHECK(fs <= pr.price + h.dot(s - pr.maximizer));
  }
}

TEST_CASE("trade direction consistency of extracted strategies") {
  fuzz::GenOptions opt;
  opt.max_nodes = 16;
  for (int i = 0; i < 10; ++i) {
    fuzz::Rng rng(fuzz::mix_seed(0x7DEALL, static_cast<std::uint64_t>(i)));
    const auto m = fuzz::random_market(rng, opt);
    const auto claim = fuzz::random_claim(rng, m.tree);
    const auto sol = superhedge::solve(m.tree, m.spread, claim);
    if (!sol.extraction) continue;
    const auto& ex = *sol.extraction;
    for (int k = 0; k < m.tree.num_nodes(); ++k) {
      const auto& node = m.tree.nodes[static_cast<std::size_t>(k)];
      const Vec held = node.parent < 0 ? Vec::Zero(m.spread.assets) : ex.strategy.at(node.parent);
      const Vec next = m.tree.is_leaf(k) ? Vec::Zero(m.spread.assets) : ex.strategy.at(k);
      for (Eigen::Index j = 0; j < m.spread.assets; ++j) {
        if (held(j) < next(j)) CHECK(ex.price_process[static_cast<std::size_t>(k)](j) ==
                                     m.spread.at(k).hi(j));
        if (held(j) > next(j)) CHECK(ex.price_process[static_cast<std::size_t>(k)](j) ==
                                     m.spread.at(k).lo(j));
      }
    }
  }
}

namespace {

// frictionless superhedging price of (S, g): the best expected claim over
// martingale measures of the fixed process S, as one LP in the masses
Rational frictionless_price(const market::ScenarioTree& tree, const std::vector<Vec>& s,
                            const market::Claim& claim) {
  const int n = tree.num_nodes();
  lp::LinearProgram prog;
  prog.sense = lp::Sense::maximize;
  prog.objective = Vec::Zero(n);
  for (const auto& [leaf, g] : claim.payoff) prog.objective(leaf) = g;
  {
    RowVec row = RowVec::Zero(n);
    row(0) = 1;
    prog.add_row(std::move(row), lp::Rel::eq, 1);
  }
  const Eigen::Index d = s[0].size();
  for (int k = 0; k < n; ++k) {
    if (tree.is_leaf(k)) continue;
    RowVec mass = RowVec::Zero(n);
    mass(k) = 1;
    for (int c : tree.nodes[static_cast<std::size_t>(k)].children) mass(c) = -1;
    prog.add_row(std::move(mass), lp::Rel::eq, 0);
    for (Eigen::Index j = 0; j < d; ++j) {
      RowVec row = RowVec::Zero(n);
      for (int c : tree.nodes[static_cast<std::size_t>(k)].children)
        row(c) = s[static_cast<std::size_t>(c)](j) - s[static_cast<std::size_t>(k)](j);
      prog.add_row(std::move(row), lp::Rel::eq, 0);
    }
  }
  prog.lower.assign(static_cast<std::size_t>(n), Rational(0));
  prog.upper.resize(static_cast<std::size_t>(n));
  const auto out = lp::solve(prog);
  REQUIRE(out.is_optimal());
  return out.optimal().value;
}

}  // namespace

TEST_CASE("extracted process reprices the claim without frictions") {
  // binomial worked example: one-period replication (1-0)/(5-1)*(4-1) = 3/4
  {
    const auto m = binomial();
    market::Claim claim;
    claim.payoff[m.tree.leaves[0]] = 1;
    claim.payoff[m.tree.leaves[1]] = 0;
    const auto sol = superhedge::solve(m.tree, m.spread, claim);
    REQUIRE(sol.extraction.has_value());
    CHECK(frictionless_price(m.tree, sol.extraction->price_process, claim) == Rational(3, 4));
  }
  // and on seeded random markets the frictionless price equals the price
  // with frictions, exactly
  fuzz::GenOptions opt;
  opt.max_nodes = 14;
  int checked = 0;
  for (int i = 0; i < 14; ++i) {
    fuzz::Rng rng(fuzz::mix_seed(0xF1FEULL, static_cast<std::uint64_t>(i)));
    const auto m = fuzz::random_market(rng, opt);
    const auto claim = fuzz::random_claim(rng, m.tree);
    const auto sol = superhedge::solve(m.tree, m.spread, claim);
    if (!sol.extraction) continue;
    ++checked;
    CHECK(frictionless_price(m.tree, sol.extraction->price_process, claim) == sol.price.price);
  }
  CHECK(checked >= 4);
}

TEST_CASE("oracle prices a constant claim at its value") {
  const auto m = binomial();
  market::Claim claim;
  claim.payoff[m.tree.leaves[0]] = Rational(5, 3);
  claim.payoff[m.tree.leaves[1]] = Rational(5, 3);
  const auto oracle = superhedge::oracle_price(m.tree, m.spread, claim);
  REQUIRE(oracle.has_value());
  CHECK(oracle->value == Rational(5, 3));
}

TEST_CASE("weak duality for random feasible price systems") {
  fuzz::GenOptions opt;
  opt.max_nodes = 14;
  int checked = 0;
  for (int i = 0; i < 12 && checked < 6; ++i) {
    fuzz::Rng rng(fuzz::mix_seed(0xABCDULL, static_cast<std::uint64_t>(i)));
    const auto m = fuzz::random_market(rng, opt);
    const auto claim = fuzz::random_claim(rng, m.tree);
    const auto sol = superhedge::solve(m.tree, m.spread, claim);
    if (sol.price.degenerate) continue;
    ++checked;
    // random feasible points: strict systems at random shrinks
    for (int probe = 2; probe <= 4; ++probe) {
      const auto cps = arbitrage::strict_cps(m.tree, m.spread, Rational(1, 1 << probe));
      if (!cps) continue;
      Rational expect = 0;
      for (std::size_t li = 0; li < m.tree.leaves.size(); ++li)
        expect += cps->leaf_mass[li] * claim.at(m.tree.leaves[li]);
      CHECK(expect <= sol.price.price);
    }
  }
}

TEST_CASE("arbitrage certificates carry the documented induction margin") {
  const auto m = three_date_drift();
  const auto cert = arbitrage::construct_arbitrage(m.tree, m.spread, Rational(1, 8), 1);
  // at the liquidation node the realized gain clears delta / 2^{t-1}
  const auto shrunk = market::shrink(m.spread, cert.shrink_eps);
  const auto values = market::value(m.tree, shrunk, cert.strategy);
  CHECK(values[0] > 0);
}

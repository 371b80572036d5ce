#include <doctest.h>

#include "frictionlab/fuzz.hpp"
#include "frictionlab/superhedge.hpp"
#include "test_fixtures.hpp"

using namespace frictionlab;
using namespace frictionlab::fixtures;

namespace {

market::Claim claim_of(const Market& m, std::vector<Rational> values) {
  market::Claim claim;
  for (std::size_t i = 0; i < m.tree.leaves.size(); ++i)
    claim.payoff[m.tree.leaves[i]] = values[i];
  return claim;
}

}  // namespace

TEST_CASE("concave envelope drops dominated pairs") {
  // digital payoff data from the binomial worked example
  std::vector<std::pair<Vec, Rational>> pairs = {
      {vec_of({Rational(5)}), 1},
      {vec_of({Rational(6)}), 1},
      {vec_of({Rational(1)}), 0},
      {vec_of({Rational(2)}), 0},
  };
  const auto f = superhedge::envelope_of(1, pairs);
  REQUIRE(f.support.size() == 3);  // (2, 0) lies strictly below the envelope
  CHECK(f.support[0] == std::pair<Vec, Rational>{vec_of({Rational(1)}), 0});
  CHECK(f.support[1] == std::pair<Vec, Rational>{vec_of({Rational(5)}), 1});
  CHECK(f.support[2] == std::pair<Vec, Rational>{vec_of({Rational(6)}), 1});

  CHECK(*f.value_at(vec_of({Rational(3)})) == Rational(1, 2));
  CHECK(*f.value_at(vec_of({Rational(4)})) == Rational(3, 4));
  CHECK(*f.value_at(vec_of({Rational(11, 2)})) == 1);
  CHECK(!f.value_at(vec_of({Rational(7)})).has_value());
}

TEST_CASE("restriction keeps the envelope exact") {
  std::vector<std::pair<Vec, Rational>> pairs = {
      {vec_of({Rational(0)}), 0},
      {vec_of({Rational(2)}), 2},
      {vec_of({Rational(4)}), 0},
  };
  const auto f = superhedge::envelope_of(1, pairs);
  const auto cut = superhedge::restrict_pairs(
      f, geometry::hull(1, {vec_of({Rational(1)}), vec_of({Rational(3)})}));
  REQUIRE(cut.size() == 3);
  CHECK(cut[0] == std::pair<Vec, Rational>{vec_of({Rational(1)}), 1});
  CHECK(cut[1] == std::pair<Vec, Rational>{vec_of({Rational(2)}), 2});
  CHECK(cut[2] == std::pair<Vec, Rational>{vec_of({Rational(3)}), 1});
}

TEST_CASE("backward sweep on the binomial example") {
  const auto m = binomial();
  const auto claim = claim_of(m, {1, 0});
  const auto sets = support_sets::compute(m.tree, m.spread);
  const auto bd = superhedge::backward_f(m.tree, m.spread, sets, claim);

  // F at the root: the line through (1,0),(5,1), capped at one
  REQUIRE(bd.f[0].support.size() == 3);
  CHECK(*bd.f[0].value_at(vec_of({Rational(1)})) == 0);
  CHECK(*bd.f[0].value_at(vec_of({Rational(4)})) == Rational(3, 4));
  CHECK(*bd.f[0].value_at(vec_of({Rational(6)})) == 1);

  const auto pr = superhedge::price(m.tree, m.spread, sets, bd);
  CHECK(!pr.degenerate);
  CHECK(pr.price == Rational(3, 4));
  CHECK(pr.maximizer == vec_of({Rational(4)}));
}

TEST_CASE("zero claim prices to zero with the zero strategy") {
  const auto m = binomial();
  const auto claim = claim_of(m, {0, 0});
  const auto sol = superhedge::solve(m.tree, m.spread, claim);
  CHECK(sol.price.price == 0);
  CHECK(*sol.duality_gap == 0);
  REQUIRE(sol.extraction.has_value());
  CHECK(sol.extraction->strategy.at(0) == vec_of({Rational(0)}));
}

TEST_CASE("constant claim prices to itself") {
  const auto m = single_path({interval(1, 2), interval(1, 2)});
  const auto claim = claim_of(m, {7});
  const auto sol = superhedge::solve(m.tree, m.spread, claim);
  CHECK(sol.price.price == 7);
  CHECK(*sol.duality_gap == 0);
}

TEST_CASE("binomial worked example end to end") {
  const auto m = binomial();
  const auto claim = claim_of(m, {1, 0});
  const auto sol = superhedge::solve(m.tree, m.spread, claim);

  CHECK(sol.price.price == Rational(3, 4));
  CHECK(sol.price.maximizer == vec_of({Rational(4)}));
  CHECK(*sol.duality_gap == 0);
  REQUIRE(sol.oracle.has_value());
  CHECK(sol.oracle->value == Rational(3, 4));

  REQUIRE(sol.extraction.has_value());
  const auto& ex = *sol.extraction;
  CHECK(ex.price_process[0] == vec_of({Rational(4)}));
  CHECK(ex.price_process[1] == vec_of({Rational(5)}));
  CHECK(ex.price_process[2] == vec_of({Rational(1)}));
  CHECK(ex.strategy.at(0) == vec_of({Rational(1, 4)}));

  // exact replication at both leaves
  const auto values = market::value(m.tree, m.spread, ex.strategy);
  CHECK(sol.price.price + values[0] == 1);
  CHECK(sol.price.price + values[1] == 0);

  // both leaves efficient
  CHECK(sol.support.leaves == m.tree.leaves);

  // frictionless price of the extracted process equals the price: the
  // one-period binomial replication (1-0)/(5-1)*(4-1) = 3/4
  CHECK(superhedge::max_leaf_mass(m.tree, m.spread, m.tree.leaves[0]) > 0);
}

TEST_CASE("degenerate market reports an empty efficient support") {
  const auto m = three_date_drift();
  const auto claim = claim_of(m, {5});
  const auto sol = superhedge::solve(m.tree, m.spread, claim);
  CHECK(sol.price.degenerate);
  CHECK(sol.support.empty());
  CHECK(sol.support.farkas.has_value());
  CHECK(!sol.oracle.has_value());
  CHECK(!sol.duality_gap.has_value());
}

TEST_CASE("omega star batched discovery matches the per-leaf test") {
  fuzz::GenOptions opt;
  opt.max_nodes = 16;
  opt.max_horizon = 3;
  for (int i = 0; i < 12; ++i) {
    fuzz::Rng rng(fuzz::mix_seed(31415ULL, static_cast<std::uint64_t>(i)));
    const auto m = fuzz::random_market(rng, opt);
    const auto support = superhedge::omega_star(m.tree, m.spread);
    for (int leaf : m.tree.leaves) {
      const Rational best = superhedge::max_leaf_mass(m.tree, m.spread, leaf);
      CHECK(support.contains(leaf) == (best > 0));
      if (support.contains(leaf)) CHECK(support.witness_mass.at(leaf) > 0);
    }
  }
}

TEST_CASE("claims supported off the efficient support do not move the price") {
  // u-branch stays consistent, v-branch is unreachable by any price system
  Market m;
  m.tree.horizon = 1;
  market::ScenarioTree::Node root{"root", 0, -1, {1, 2}};
  market::ScenarioTree::Node u{"u", 1, 0, {}};
  market::ScenarioTree::Node v{"v", 1, 0, {}};
  // root support pins the price to x = 1, the far end of the children's
  // hull, so no mass can reach the v-branch
  m.tree.nodes = {root, u, v};
  m.tree.leaves = {1, 2};
  m.spread.assets = 1;
  m.spread.box = {interval(Rational(1, 2), 1), interval(1, 2), interval(9, 10)};

  const auto support = superhedge::omega_star(m.tree, m.spread);
  CHECK(support.contains(1));
  CHECK(!support.contains(2));

  const auto base = superhedge::solve(m.tree, m.spread, claim_of(m, {2, 0}));
  const auto bumped = superhedge::solve(m.tree, m.spread, claim_of(m, {2, 100}));
  CHECK(base.price.price == bumped.price.price);
  CHECK(*base.duality_gap == 0);
  CHECK(*bumped.duality_gap == 0);
}

TEST_CASE("duality holds on seeded random markets with random claims") {
  fuzz::GenOptions opt;
  opt.max_nodes = 20;
  int checked = 0;
  for (int i = 0; i < 20; ++i) {
    fuzz::Rng rng(fuzz::mix_seed(999331ULL, static_cast<std::uint64_t>(i)));
    const auto m = fuzz::random_market(rng, opt);
    const auto claim = fuzz::random_claim(rng, m.tree);
    const auto res = fuzz::check_duality(m, claim);
    INFO("market ", i, ": ", res.detail);
    CHECK(res.ok);
    checked += res.degenerate ? 0 : 1;
  }
  CHECK(checked >= 5);
}

#include <doctest.h>

#include <random>

#include "frictionlab/arbitrage.hpp"
#include "frictionlab/lp.hpp"
#include "frictionlab/superhedge.hpp"
#include "frictionlab/market.hpp"
#include "test_fixtures.hpp"

using namespace frictionlab;
using namespace frictionlab::fixtures;

namespace {

market::Strategy path_strategy(const Market& m, std::vector<Rational> units) {
  auto h = market::zero_strategy(m.tree, m.spread.assets);
  for (std::size_t t = 0; t < units.size(); ++t)
    h.holding[t] = vec_of({units[t]});
  return h;
}

}  // namespace

TEST_CASE("validation") {
  const auto good = three_date_drift();
  CHECK(market::validate(good.tree, good.spread).ok);

  auto degenerate = good;
  degenerate.spread.box[1] = interval(2, 2);
  const auto r1 = market::validate(degenerate.tree, degenerate.spread);
  CHECK(!r1.ok);
  CHECK(r1.message.find("efficient friction") != std::string::npos);

  auto ragged = good;
  ragged.tree.horizon = 3;  // leaf now sits at depth T-1
  const auto r2 = market::validate(ragged.tree, ragged.spread);
  CHECK(!r2.ok);
  CHECK(r2.message.find("ragged") != std::string::npos);

  auto negative = good;
  negative.spread.box[0] = interval(Rational(-1), 3);
  const auto r3 = market::validate(negative.tree, negative.spread);
  CHECK(!r3.ok);
  CHECK(r3.message.find("bid > 0") != std::string::npos);
}

TEST_CASE("horizon zero market") {
  const auto m = single_path({interval(1, 2)});
  CHECK(market::validate(m.tree, m.spread).ok);

  const auto verdict = arbitrage::rna_verdict(m.tree, m.spread);
  CHECK(verdict.robust_no_arbitrage);
  CHECK(arbitrage::verify_verdict(m.tree, m.spread, verdict));

  market::Claim claim;
  claim.payoff[0] = Rational(9, 7);
  const auto sol = superhedge::solve(m.tree, m.spread, claim);
  CHECK(sol.price.price == Rational(9, 7));
  CHECK(*sol.duality_gap == 0);
  CHECK(sol.support.leaves == std::vector<int>{0});
}

TEST_CASE("terminal value of path strategies") {
  const auto m = three_date_drift();
  CHECK(market::value(m.tree, m.spread, market::zero_strategy(m.tree, 1)) ==
        std::vector<Rational>{0});

  // buy at time 0, hold, sell at time 2
  CHECK(market::value(m.tree, m.spread, path_strategy(m, {1, 1})) ==
        std::vector<Rational>{Rational(1, 2)});

  // buy at time 0, sell at time 1
  CHECK(market::value(m.tree, m.spread, path_strategy(m, {1, 0})) ==
        std::vector<Rational>{-1});
}

TEST_CASE("frictionless integral") {
  const auto m = three_date_drift();
  const auto h = path_strategy(m, {1, 1});
  const std::vector<Vec> constant(3, vec_of({Rational(3)}));
  CHECK(market::frictionless_integral(m.tree, h, constant) == std::vector<Rational>{0});

  const std::vector<Vec> s = {vec_of({Rational(3)}), vec_of({Rational(7, 2)}),
                              vec_of({Rational(7, 2)})};
  CHECK(market::frictionless_integral(m.tree, h, s) == std::vector<Rational>{Rational(1, 2)});
  CHECK(market::frictionless_integral(m.tree, market::zero_strategy(m.tree, 1), s) ==
        std::vector<Rational>{0});
}

TEST_CASE("solvency cone membership") {
  const auto box = interval(1, 3);
  const auto cone = market::cone_from_box(box);
  const Vec zero = Vec::Zero(1);

  CHECK(market::rebalance_solvent(cone, box, zero, zero));
  // buying one share at the ask is exactly a cone generator
  CHECK(market::rebalance_solvent(cone, box, zero, vec_of({Rational(1)})));
  // receiving a share with no cash leg is not solvent
  {
    const auto gens = cone.generators();
    lp::LinearProgram prog;
    prog.objective = Vec::Zero(static_cast<Eigen::Index>(gens.size()));
    for (Eigen::Index k = 0; k < 2; ++k) {
      RowVec row(static_cast<Eigen::Index>(gens.size()));
      for (Eigen::Index i = 0; i < row.size(); ++i) row(i) = gens[static_cast<std::size_t>(i)](k);
      prog.add_row(std::move(row), lp::Rel::eq, k == 0 ? Rational(0) : Rational(-1));
    }
    prog.lower.assign(gens.size(), Rational(0));
    prog.upper.resize(gens.size());
    const auto out = lp::feasible_point(prog);
    REQUIRE(std::holds_alternative<lp::Infeasible>(out));
    CHECK(lp::verify_infeasible(prog, std::get<lp::Infeasible>(out)));
  }

  const auto m = three_date_drift();
  std::vector<market::SolvencyCone> cones;
  for (const auto& b : m.spread.box) cones.push_back(market::cone_from_box(b));
  const auto ok = market::solvency_check(m.tree, cones, m.spread, path_strategy(m, {1, 1}));
  for (bool v : ok) CHECK(v);
}

TEST_CASE("dominance by frictionless integrals in the spread") {
  std::mt19937_64 rng(99ULL);
  auto coin = [&](int lo, int hi) {
    return static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1)) + lo;
  };
  const auto m = three_date_drift();
  for (int trial = 0; trial < 50; ++trial) {
    const auto h = path_strategy(m, {Rational(coin(-4, 4), coin(1, 2)),
                                     Rational(coin(-4, 4), coin(1, 2))});
    std::vector<Vec> s;
    for (const auto& b : m.spread.box) {
      const Rational u(coin(0, 16), 16);
      s.push_back(b.lo + u * (b.hi - b.lo));
    }
    const auto lhs = market::value(m.tree, m.spread, h);
    const auto rhs = market::frictionless_integral(m.tree, h, s);
    for (std::size_t i = 0; i < lhs.size(); ++i) CHECK(lhs[i] <= rhs[i]);
  }
}

TEST_CASE("value invariant under an inserted flat step") {
  // appending a no-trade period contributes nothing
  const auto base = single_path({interval(1, 3), interval(2, 4)});
  const auto longer = single_path({interval(1, 3), interval(2, 4), interval(5, 7)});
  const auto h2 = path_strategy(base, {Rational(3, 2)});
  const auto h3 = path_strategy(longer, {Rational(3, 2), Rational(3, 2)});
  // liquidation moves to the later leaf at its own bid
  const auto v2 = market::value(base.tree, base.spread, h2);
  const auto v3 = market::value(longer.tree, longer.spread, h3);
  CHECK(v2[0] == Rational(3, 2) * (2 - 3));
  CHECK(v3[0] == Rational(3, 2) * (5 - 3));
}

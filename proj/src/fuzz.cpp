#include "frictionlab/fuzz.hpp"

#include <atomic>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "frictionlab/market_io.hpp"

namespace frictionlab::fuzz {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed ^ (index * 0x9E3779B97F4A7C15ULL + 0xBF58476D1CE4E5B9ULL);
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

MarketSample random_market(Rng& rng, const GenOptions& opt) {
  MarketSample m;
  const int d = rng.uniform(1, 100) <= 60 ? 1 : std::min(2, opt.max_assets);
  const int horizon = rng.uniform(1, opt.max_horizon);
  const int style = rng.uniform(0, 2);
  m.tree.horizon = horizon;
  m.spread.assets = d;

  std::vector<Rational> base(static_cast<std::size_t>(d));
  std::vector<Rational> drift(static_cast<std::size_t>(d), Rational(0));
  for (int j = 0; j < d; ++j) {
    base[static_cast<std::size_t>(j)] = Rational(rng.uniform(16, 48), 8);
    if (style == 2) drift[static_cast<std::size_t>(j)] = Rational(rng.uniform(-12, 12), 8);
  }

  std::vector<Vec> mid;  // per node
  auto make_box = [&](const Vec& center) {
    geometry::Box b;
    b.lo = Vec(d);
    b.hi = Vec(d);
    for (int j = 0; j < d; ++j) {
      const Rational w(rng.uniform(2, 12), 8);
      Rational lo = center(j) - w / 2;
      if (lo < Rational(1, 8)) lo = Rational(1, 8);
      b.lo(j) = lo;
      b.hi(j) = lo + w;
    }
    return b;
  };
  auto center_for = [&](int depth, const Vec* parent_mid) {
    Vec c(d);
    for (int j = 0; j < d; ++j) {
      switch (style) {
        case 0:
          c(j) = base[static_cast<std::size_t>(j)] + Rational(rng.uniform(-8, 8), 8);
          break;
        case 1:
          c(j) = (parent_mid ? (*parent_mid)(j) : base[static_cast<std::size_t>(j)]) +
                 Rational(rng.uniform(-8, 8), 8);
          break;
        default:
          c(j) = base[static_cast<std::size_t>(j)] + Rational(depth) * drift[static_cast<std::size_t>(j)] +
                 Rational(rng.uniform(-2, 2), 8);
          break;
      }
      if (c(j) < Rational(1, 2)) c(j) = Rational(1, 2);
    }
    return c;
  };

  market::ScenarioTree::Node root;
  root.id = "n0";
  m.tree.nodes.push_back(root);
  mid.push_back(center_for(0, nullptr));
  m.spread.box.push_back(make_box(mid[0]));

  int budget = opt.max_nodes - 1;
  std::vector<int> frontier = {0};
  for (int depth = 1; depth <= horizon; ++depth) {
    std::vector<int> next;
    for (int parent : frontier) {
      int kids = rng.uniform(1, opt.max_branch);
      const int levels_left = horizon - depth;
      // keep enough budget for a single chain below every new node
      while (kids > 1 && budget - kids * (1 + levels_left) < 0) --kids;
      if (kids < 1) kids = 1;
      for (int c = 0; c < kids; ++c) {
        const int k = m.tree.num_nodes();
        market::ScenarioTree::Node node;
        node.id = "n" + std::to_string(k);
        node.depth = depth;
        node.parent = parent;
        m.tree.nodes.push_back(node);
        m.tree.nodes[static_cast<std::size_t>(parent)].children.push_back(k);
        mid.push_back(center_for(depth, &mid[static_cast<std::size_t>(parent)]));
        m.spread.box.push_back(make_box(mid[static_cast<std::size_t>(k)]));
        --budget;
        next.push_back(k);
      }
    }
    frontier = std::move(next);
  }
  for (int k = 0; k < m.tree.num_nodes(); ++k)
    if (m.tree.is_leaf(k)) m.tree.leaves.push_back(k);
  return m;
}

market::Claim random_claim(Rng& rng, const market::ScenarioTree& tree) {
  market::Claim claim;
  for (int leaf : tree.leaves) claim.payoff[leaf] = rng.rational(-32, 32, 2);
  return claim;
}

DichotomyResult check_dichotomy(const MarketSample& m, const Rational& delta) {
  DichotomyResult res;
  try {
    const auto verdict = arbitrage::rna_verdict(m.tree, m.spread, delta);
    std::string why;
    if (!arbitrage::verify_verdict(m.tree, m.spread, verdict, &why)) {
      res.detail = "verdict failed verification: " + why;
      return res;
    }
    if (verdict.robust_no_arbitrage) {
      // the opposite construction must refuse at the certified margin
      try {
        arbitrage::construct_arbitrage(m.tree, m.spread, verdict.cps->shrink_eps, delta);
        res.detail = "arbitrage constructed despite a strict price system";
        return res;
      } catch (const input_error&) {
      }
    } else {
      res.arbitrage = true;
      res.fallbacks = verdict.certificate->rebalance_fallbacks;
      if (arbitrage::strict_cps(m.tree, m.spread, verdict.certificate->shrink_eps)) {
        res.detail = "strict price system exists at the arbitrage witness shrink";
        return res;
      }
    }
    res.ok = true;
  } catch (const std::exception& e) {
    res.detail = std::string("exception: ") + e.what();
  }
  return res;
}

DualityResult check_duality(const MarketSample& m, const market::Claim& claim) {
  DualityResult res;
  try {
    const auto sol = superhedge::solve(m.tree, m.spread, claim);
    if (sol.price.degenerate) {
      res.degenerate = true;
      res.ok = true;
      return res;
    }
    if (!sol.duality_gap || *sol.duality_gap != 0) {
      res.detail = "duality gap is not zero";
      return res;
    }
    const auto values = market::value(m.tree, m.spread, sol.extraction->strategy);
    for (std::size_t i = 0; i < m.tree.leaves.size(); ++i) {
      const int leaf = m.tree.leaves[i];
      if (!sol.support.contains(leaf)) continue;
      if (!(sol.price.price + values[i] >= claim.at(leaf))) {
        res.detail = "superhedge inequality violated on the efficient support";
        return res;
      }
    }
    // weak duality for the witness masses
    Rational expect = 0;
    for (std::size_t i = 0; i < m.tree.leaves.size(); ++i)
      expect += sol.oracle->optimizer.node_mass[static_cast<std::size_t>(m.tree.leaves[i])] *
                claim.at(m.tree.leaves[i]);
    if (expect != sol.oracle->value) {
      res.detail = "oracle optimizer does not reproduce its value";
      return res;
    }
    res.ok = true;
  } catch (const std::exception& e) {
    res.detail = std::string("exception: ") + e.what();
  }
  return res;
}

FuzzReport run_fuzz(std::uint64_t seed, int n, const GenOptions& opt, int threads) {
  FuzzReport report;
  report.total = n;

  struct Item {
    bool ok = true;
    bool arbitrage = false;
    bool degenerate = false;
    std::string detail;
    int nodes = 0;
    std::string dump;
  };
  std::vector<Item> items(static_cast<std::size_t>(std::max(0, n)));

  auto work = [&](int index) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(index)));
    const auto m = random_market(rng, opt);
    const auto claim = random_claim(rng, m.tree);
    Item item;
    item.nodes = m.tree.num_nodes();
    const auto dich = check_dichotomy(m);
    item.arbitrage = dich.arbitrage;
    if (!dich.ok) {
      item.ok = false;
      item.detail = "dichotomy: " + dich.detail;
    } else {
      const auto dual = check_duality(m, claim);
      item.degenerate = dual.degenerate;
      if (!dual.ok) {
        item.ok = false;
        item.detail = "duality: " + dual.detail;
      }
    }
    if (!item.ok) {
      market_io::MarketData data;
      data.tree = m.tree;
      data.spread = m.spread;
      data.claim = claim;
      data.has_claim = true;
      item.dump = market_io::market_to_json(data).dump(2);
    }
    items[static_cast<std::size_t>(index)] = std::move(item);
  };

  if (threads <= 1) {
    for (int i = 0; i < n; ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> cursor{0};
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const int i = cursor.fetch_add(1);
          if (i >= n) return;
          work(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  int best_nodes = -1;
  for (int i = 0; i < n; ++i) {
    const auto& item = items[static_cast<std::size_t>(i)];
    if (item.arbitrage) ++report.arbitrage;
    else ++report.rna;
    if (item.degenerate) ++report.degenerate;
    if (!item.ok) {
      ++report.violations;
      report.failures.emplace_back(static_cast<std::uint64_t>(i), item.detail);
      if (best_nodes < 0 || item.nodes < best_nodes) {
        best_nodes = item.nodes;
        report.minimal_failure = static_cast<std::uint64_t>(i);
        report.minimal_failure_market = item.dump;
      }
    }
  }
  return report;
}

std::string format_report(const FuzzReport& report) {
  std::ostringstream out;
  out << "markets: " << report.total << "\n";
  out << "robust-no-arbitrage: " << report.rna << "\n";
  out << "arbitrage: " << report.arbitrage << "\n";
  out << "degenerate-claims: " << report.degenerate << "\n";
  out << "violations: " << report.violations << "\n";
  for (const auto& [index, detail] : report.failures)
    out << "failure[" << index << "]: " << detail << "\n";
  if (report.minimal_failure) {
    out << "minimal failing market (index " << *report.minimal_failure << "):\n";
    out << report.minimal_failure_market << "\n";
  }
  return out.str();
}

}  // namespace frictionlab::fuzz

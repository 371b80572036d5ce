#pragma once

#include <cstdint>
#include <random>

#include "frictionlab/arbitrage.hpp"
#include "frictionlab/superhedge.hpp"

namespace frictionlab::fuzz {

// All draws go through raw mt19937_64 output, never through std
// distributions, so the stream is identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  std::uint64_t next() { return eng_(); }
  int uniform(int lo, int hi) {
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  Rational rational(int num_lo, int num_hi, int den_pow_max) {
    const int den = 1 << uniform(0, den_pow_max);
    return Rational(uniform(num_lo, num_hi), den);
  }

 private:
  std::mt19937_64 eng_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

struct GenOptions {
  int max_horizon = 4;
  int max_branch = 3;
  int max_assets = 2;
  int max_nodes = 40;
};

struct MarketSample {
  market::ScenarioTree tree;
  market::BidAskProcess spread;
};

MarketSample random_market(Rng& rng, const GenOptions& opt);
market::Claim random_claim(Rng& rng, const market::ScenarioTree& tree);

// Full no-arbitrage dichotomy on one market: the verdict must carry exactly
// one certificate, it must re-verify, and the opposite construction must
// refuse.
struct DichotomyResult {
  bool ok = false;
  bool arbitrage = false;
  int fallbacks = 0;
  std::string detail;
};

DichotomyResult check_dichotomy(const MarketSample& m, const Rational& delta = 1);

// Superhedging duality on one market/claim: exact zero gap and a leafwise
// superhedge on the efficient support.
struct DualityResult {
  bool ok = false;
  bool degenerate = false;  // no price system; nothing to check
  std::string detail;
};

DualityResult check_duality(const MarketSample& m, const market::Claim& claim);

struct FuzzReport {
  int total = 0;
  int rna = 0;
  int arbitrage = 0;
  int degenerate = 0;
  int violations = 0;
  std::vector<std::pair<std::uint64_t, std::string>> failures;  // (index, detail)
  std::optional<std::uint64_t> minimal_failure;                 // fewest nodes
  std::string minimal_failure_market;                           // its JSON dump
};

// Runs both property checks over n seeded markets; `threads` > 1 parallelizes
// the iterations, results are merged in index order so the report is
// byte-identical either way.
FuzzReport run_fuzz(std::uint64_t seed, int n, const GenOptions& opt, int threads = 1);

std::string format_report(const FuzzReport& report);

}  // namespace frictionlab::fuzz

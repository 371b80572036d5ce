// frictionlab: exact no-arbitrage verdicts and model-free superhedging prices
// for bid-ask scenario trees, every answer shipped with a re-checkable
// certificate.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <iostream>

#include "frictionlab/arbitrage.hpp"
#include "frictionlab/fuzz.hpp"
#include "frictionlab/market_io.hpp"
#include "frictionlab/superhedge.hpp"

namespace {

using Json = nlohmann::ordered_json;
using namespace frictionlab;

constexpr int kExitOk = 0;
constexpr int kExitEngineBug = 1;
constexpr int kExitInput = 2;
constexpr int kExitVerifyFailed = 3;
constexpr int kExitArbitrage = 10;
constexpr int kExitNoPriceSystem = 11;

struct Options {
  std::string market_path;
  std::string claim_path;
  std::string strategy_path;
  std::string price_path;
  std::string supports_path;
  std::string report_path;
  std::string verify_report_path;
  std::string eps_text;
  std::string delta_text = "1";
  int decimal_digits = -1;
  bool verify = false;
  std::uint64_t seed = 0;
  int count = 100;
};

int thread_cap() {
  const char* env = std::getenv("FRICTIONLAB_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n > 0 ? n : 1;
}

const std::string& node_id(const market::ScenarioTree& tree, int k) {
  return tree.nodes[static_cast<std::size_t>(k)].id;
}

Json vec_json(const Vec& v) { return market_io::rational_array(v); }

Json leaf_map(const market::ScenarioTree& tree, const std::vector<Rational>& by_leaf) {
  Json j;
  for (std::size_t i = 0; i < tree.leaves.size(); ++i)
    j[node_id(tree, tree.leaves[i])] = to_string(by_leaf[i]);
  return j;
}

Json cps_json(const market::ScenarioTree& tree, const arbitrage::ConsistentPriceSystem& cps) {
  Json j;
  j["shrink_eps"] = to_string(cps.shrink_eps);
  // support sets may be lower-dimensional, spread boxes never are
  j["interior_convention"] = "relative interior for support sets, ambient interior for boxes";
  j["leaf_mass"] = leaf_map(tree, cps.leaf_mass);
  Json prices;
  for (int k = 0; k < tree.num_nodes(); ++k)
    prices[node_id(tree, k)] = vec_json(cps.price[static_cast<std::size_t>(k)]);
  j["prices"] = std::move(prices);
  return j;
}

Json cert_json(const market::ScenarioTree& tree, const arbitrage::ArbitrageCertificate& cert) {
  Json j;
  j["shrink_eps"] = to_string(cert.shrink_eps);
  j["delta"] = to_string(cert.delta);
  j["strategy"] = market_io::strategy_to_json(tree, cert.strategy);
  j["leaf_value_shrunk"] = leaf_map(tree, cert.leaf_value_shrunk);
  j["leaf_value_original"] = leaf_map(tree, cert.leaf_value_original);
  Json opens = Json::array();
  for (int k : cert.opening_nodes) opens.push_back(node_id(tree, k));
  j["opening_nodes"] = std::move(opens);
  Json actions;
  for (int k = 0; k < tree.num_nodes(); ++k) {
    if (cert.action[static_cast<std::size_t>(k)] == arbitrage::Action::none) continue;
    actions[node_id(tree, k)] = arbitrage::action_name(cert.action[static_cast<std::size_t>(k)]);
  }
  j["actions"] = std::move(actions);
  j["rebalance_fallbacks"] = cert.rebalance_fallbacks;
  return j;
}

arbitrage::ConsistentPriceSystem cps_from_json(const market::ScenarioTree& tree,
                                               Eigen::Index assets, const Json& j) {
  arbitrage::ConsistentPriceSystem cps;
  cps.shrink_eps = parse_rational(j.at("shrink_eps").get<std::string>());
  for (int leaf : tree.leaves)
    cps.leaf_mass.push_back(
        parse_rational(j.at("leaf_mass").at(node_id(tree, leaf)).get<std::string>()));
  const auto prices = market_io::parse_price_process(tree, assets, j.at("prices"));
  cps.price = prices;
  return cps;
}

arbitrage::ArbitrageCertificate cert_from_json(const market::ScenarioTree& tree,
                                               Eigen::Index assets, const Json& j) {
  arbitrage::ArbitrageCertificate cert;
  cert.shrink_eps = parse_rational(j.at("shrink_eps").get<std::string>());
  cert.delta = parse_rational(j.at("delta").get<std::string>());
  cert.strategy = market_io::parse_strategy(tree, assets, j.at("strategy"));
  for (int leaf : tree.leaves) {
    cert.leaf_value_shrunk.push_back(
        parse_rational(j.at("leaf_value_shrunk").at(node_id(tree, leaf)).get<std::string>()));
    cert.leaf_value_original.push_back(
        parse_rational(j.at("leaf_value_original").at(node_id(tree, leaf)).get<std::string>()));
  }
  cert.action.assign(static_cast<std::size_t>(tree.num_nodes()), arbitrage::Action::none);
  return cert;
}

void emit(const Options& opt, Json& report) {
  if (opt.decimal_digits >= 0) market_io::decorate_decimals(report, opt.decimal_digits);
  if (!opt.report_path.empty()) {
    market_io::save_json(opt.report_path, report);
  } else {
    std::cout << report.dump(2) << "\n";
  }
}

void dump_supports(const Options& opt, const market_io::MarketData& m) {
  if (opt.supports_path.empty()) return;
  const auto sets = support_sets::compute(m.tree, m.spread);
  const auto profile = support_sets::tau(m.tree, sets);
  Json j;
  Json nodes = Json::array();
  for (int k = 0; k < m.tree.num_nodes(); ++k) {
    Json nj;
    nj["id"] = node_id(m.tree, k);
    Json sup = Json::array();
    for (const auto& v : sets.at(k).vertices) sup.push_back(vec_json(v));
    nj["support"] = std::move(sup);
    Json hull = Json::array();
    for (const auto& v : sets.hull_at(k).vertices) hull.push_back(vec_json(v));
    nj["conv_children"] = std::move(hull);
    nodes.push_back(std::move(nj));
  }
  j["nodes"] = std::move(nodes);
  Json tau;
  for (std::size_t i = 0; i < m.tree.leaves.size(); ++i) {
    const auto& t = profile.tau_by_leaf[i];
    if (t) {
      tau[node_id(m.tree, m.tree.leaves[i])] = *t;
    } else {
      tau[node_id(m.tree, m.tree.leaves[i])] = nullptr;
    }
  }
  j["tau"] = std::move(tau);
  market_io::save_json(opt.supports_path, j);
}

int run_check(const Options& opt) {
  const auto m = market_io::load_market(opt.market_path);
  if (const auto report = market::validate(m.tree, m.spread); !report.ok)
    throw input_error(report.message);
  dump_supports(opt, m);
  const Rational delta = parse_rational(opt.delta_text);

  Json report;
  report["command"] = "check";
  report["market"] = opt.market_path;

  arbitrage::RnaVerdict verdict;
  if (!opt.eps_text.empty()) {
    // pinned shrink: decide at exactly this eps
    const Rational eps = parse_rational(opt.eps_text);
    verdict.resolution_bound_k = arbitrage::resolution_bound(m.tree, m.spread);
    if (auto cps = arbitrage::strict_cps(m.tree, m.spread, eps)) {
      verdict.robust_no_arbitrage = true;
      verdict.cps = std::move(cps);
      verdict.probes.push_back({eps, true});
    } else {
      verdict.robust_no_arbitrage = false;
      verdict.probes.push_back({eps, false});
      verdict.certificate = arbitrage::construct_arbitrage(m.tree, m.spread, eps, delta);
    }
    report["shrink_pinned"] = true;
  } else {
    verdict = arbitrage::rna_verdict(m.tree, m.spread, delta);
  }

  report["resolution_bound_k"] = verdict.resolution_bound_k;
  Json probes = Json::array();
  for (const auto& p : verdict.probes) {
    Json pj;
    pj["eps"] = to_string(p.eps);
    pj["strict_cps"] = p.strict_cps_exists;
    probes.push_back(std::move(pj));
  }
  report["probes"] = std::move(probes);
  report["resolution_sensitive"] = verdict.resolution_sensitive;
  report["verdict"] = verdict.robust_no_arbitrage ? "robust-no-arbitrage" : "arbitrage";
  if (verdict.cps) report["cps"] = cps_json(m.tree, *verdict.cps);
  if (verdict.certificate) report["arbitrage_certificate"] = cert_json(m.tree, *verdict.certificate);

  bool verified = true;
  if (opt.verify) {
    std::string why;
    verified = arbitrage::verify_verdict(m.tree, m.spread, verdict, &why);
    report["verified"] = verified;
    if (!verified) report["verify_error"] = why;
  }
  emit(opt, report);
  if (!verified) return kExitVerifyFailed;
  return verdict.robust_no_arbitrage ? kExitOk : kExitArbitrage;
}

// re-check a previously written check report against the market, using only
// the value accounting and exact arithmetic
int run_verify_report(const Options& opt) {
  const auto m = market_io::load_market(opt.market_path);
  const Json report = market_io::load_json(opt.verify_report_path);
  bool ok = false;
  std::string why;
  if (report.contains("cps")) {
    ok = arbitrage::verify_cps(m.tree, m.spread,
                               cps_from_json(m.tree, m.spread.assets, report["cps"]), &why);
  } else if (report.contains("arbitrage_certificate")) {
    ok = arbitrage::verify_arbitrage(
        m.tree, m.spread,
        cert_from_json(m.tree, m.spread.assets, report["arbitrage_certificate"]), &why);
  } else if (report.contains("strategy") && report.contains("price")) {
    // superhedge report: price + strategy must superhedge the claim on the
    // listed efficient support, and the gap field must be zero
    if (!m.has_claim && opt.claim_path.empty())
      throw input_error("verify: claim required for a superhedge report");
    const auto claim =
        opt.claim_path.empty() ? m.claim : market_io::load_claim(m.tree, opt.claim_path);
    const auto h = market_io::parse_strategy(m.tree, m.spread.assets, report.at("strategy"));
    const Rational price = parse_rational(report.at("price").get<std::string>());
    const auto values = market::value(m.tree, m.spread, h);
    ok = true;
    for (const auto& id : report.at("omega_star")) {
      const int leaf = m.tree.index_of(id.get<std::string>());
      if (leaf < 0) { ok = false; why = "unknown leaf in omega_star"; break; }
      std::size_t pos = 0;
      for (; pos < m.tree.leaves.size(); ++pos)
        if (m.tree.leaves[pos] == leaf) break;
      if (!(price + values[pos] >= claim.at(leaf))) {
        ok = false;
        why = "superhedge inequality fails at leaf '" + id.get<std::string>() + "'";
        break;
      }
    }
    if (ok && parse_rational(report.at("duality_gap").get<std::string>()) != 0) {
      ok = false;
      why = "nonzero duality gap";
    }
    if (ok && report.contains("oracle_price") &&
        parse_rational(report.at("oracle_price").get<std::string>()) != price) {
      ok = false;
      why = "oracle price differs from the primal price";
    }
  } else {
    throw input_error("verify: unrecognized report shape");
  }
  Json out;
  out["command"] = "verify";
  out["report"] = opt.verify_report_path;
  out["verified"] = ok;
  if (!ok) out["verify_error"] = why;
  std::cout << out.dump(2) << "\n";
  return ok ? kExitOk : kExitVerifyFailed;
}

int run_cps(const Options& opt) {
  const auto m = market_io::load_market(opt.market_path);
  if (const auto report = market::validate(m.tree, m.spread); !report.ok)
    throw input_error(report.message);
  const Rational eps = opt.eps_text.empty() ? Rational(1, 8) : parse_rational(opt.eps_text);
  const auto cps = arbitrage::strict_cps(m.tree, m.spread, eps);
  Json report;
  report["command"] = "cps";
  report["market"] = opt.market_path;
  report["eps"] = to_string(eps);
  report["found"] = cps.has_value();
  if (cps) report["cps"] = cps_json(m.tree, *cps);
  emit(opt, report);
  return kExitOk;
}

int run_superhedge(const Options& opt) {
  const auto m = market_io::load_market(opt.market_path);
  if (!m.has_claim && opt.claim_path.empty())
    throw input_error("superhedge: no claim in the market file and no --claim given");
  const auto claim =
      opt.claim_path.empty() ? m.claim : market_io::load_claim(m.tree, opt.claim_path);
  dump_supports(opt, m);

  const auto sol = superhedge::solve(m.tree, m.spread, claim);
  Json report;
  report["command"] = "superhedge";
  report["market"] = opt.market_path;
  if (sol.price.degenerate) {
    report["omega_star_empty"] = true;
    report["note"] = "no consistent price system; the price is unconstrained below";
    if (sol.support.farkas) report["infeasibility_certificate"] = "cps-lp farkas on file";
    emit(opt, report);
    return kExitNoPriceSystem;
  }
  report["omega_star_empty"] = false;
  report["price"] = to_string(sol.price.price);
  report["maximizer"] = vec_json(sol.price.maximizer);
  report["strategy"] = market_io::strategy_to_json(m.tree, sol.extraction->strategy);
  Json process;
  for (int k = 0; k < m.tree.num_nodes(); ++k)
    process[node_id(m.tree, k)] = vec_json(sol.extraction->price_process[static_cast<std::size_t>(k)]);
  report["price_process"] = std::move(process);
  Json omega = Json::array();
  for (int leaf : sol.support.leaves) omega.push_back(node_id(m.tree, leaf));
  report["omega_star"] = std::move(omega);
  Json witness;
  for (const auto& [leaf, mass] : sol.support.witness_mass)
    witness[node_id(m.tree, leaf)] = to_string(mass);
  report["witness_mass"] = std::move(witness);
  report["oracle_price"] = to_string(sol.oracle->value);
  Json dual;
  Json dual_mass;
  Json dual_price;
  for (int k = 0; k < m.tree.num_nodes(); ++k) {
    dual_mass[node_id(m.tree, k)] =
        to_string(sol.oracle->optimizer.node_mass[static_cast<std::size_t>(k)]);
    if (const auto s = sol.oracle->optimizer.price_at(k)) dual_price[node_id(m.tree, k)] = vec_json(*s);
  }
  dual["node_mass"] = std::move(dual_mass);
  dual["prices"] = std::move(dual_price);
  report["dual_optimizer"] = std::move(dual);
  report["duality_gap"] = to_string(*sol.duality_gap);

  bool verified = true;
  if (opt.verify) {
    const auto values = market::value(m.tree, m.spread, sol.extraction->strategy);
    std::string why;
    for (std::size_t i = 0; i < m.tree.leaves.size(); ++i) {
      const int leaf = m.tree.leaves[i];
      if (!sol.support.contains(leaf)) continue;
      if (!(sol.price.price + values[i] >= claim.at(leaf))) {
        verified = false;
        why = "superhedge inequality fails at '" + node_id(m.tree, leaf) + "'";
        break;
      }
    }
    if (verified && *sol.duality_gap != 0) {
      verified = false;
      why = "nonzero duality gap";
    }
    report["verified"] = verified;
    if (!verified) report["verify_error"] = why;
  }
  emit(opt, report);
  return verified ? kExitOk : kExitVerifyFailed;
}

int run_omega_star(const Options& opt) {
  const auto m = market_io::load_market(opt.market_path);
  if (const auto report = market::validate(m.tree, m.spread); !report.ok)
    throw input_error(report.message);
  const auto support = superhedge::omega_star(m.tree, m.spread);
  Json report;
  report["command"] = "omega-star";
  report["market"] = opt.market_path;
  Json omega = Json::array();
  for (int leaf : support.leaves) omega.push_back(node_id(m.tree, leaf));
  report["omega_star"] = std::move(omega);
  Json witness;
  for (const auto& [leaf, mass] : support.witness_mass)
    witness[node_id(m.tree, leaf)] = to_string(mass);
  report["witness_mass"] = std::move(witness);
  report["empty"] = support.empty();
  emit(opt, report);
  return support.empty() ? kExitNoPriceSystem : kExitOk;
}

int run_oracle(const Options& opt) {
  const auto m = market_io::load_market(opt.market_path);
  if (!m.has_claim && opt.claim_path.empty())
    throw input_error("oracle: no claim in the market file and no --claim given");
  const auto claim =
      opt.claim_path.empty() ? m.claim : market_io::load_claim(m.tree, opt.claim_path);
  const auto oracle = superhedge::oracle_price(m.tree, m.spread, claim);
  Json report;
  report["command"] = "oracle";
  report["market"] = opt.market_path;
  if (!oracle) {
    report["note"] = "no consistent price system";
    emit(opt, report);
    return kExitNoPriceSystem;
  }
  report["oracle_price"] = to_string(oracle->value);
  Json mass;
  Json prices;
  for (int k = 0; k < m.tree.num_nodes(); ++k) {
    mass[node_id(m.tree, k)] = to_string(oracle->optimizer.node_mass[static_cast<std::size_t>(k)]);
    if (const auto s = oracle->optimizer.price_at(k)) prices[node_id(m.tree, k)] = vec_json(*s);
  }
  report["node_mass"] = std::move(mass);
  report["prices"] = std::move(prices);
  emit(opt, report);
  return kExitOk;
}

int run_value(const Options& opt) {
  const auto m = market_io::load_market(opt.market_path);
  if (const auto report = market::validate(m.tree, m.spread); !report.ok)
    throw input_error(report.message);
  if (opt.strategy_path.empty()) throw input_error("value: --strategy required");
  const auto h = market_io::load_strategy(m.tree, m.spread.assets, opt.strategy_path);
  Json report;
  report["command"] = "value";
  report["market"] = opt.market_path;
  report["leaf_value"] = leaf_map(m.tree, market::value(m.tree, m.spread, h));
  if (!opt.price_path.empty()) {
    const auto s = market_io::load_price_process(m.tree, m.spread.assets, opt.price_path);
    report["frictionless_integral"] = leaf_map(m.tree, market::frictionless_integral(m.tree, h, s));
  }
  std::vector<market::SolvencyCone> cones;
  for (const auto& b : m.spread.box) cones.push_back(market::cone_from_box(b));
  const auto solvent = market::solvency_check(m.tree, cones, m.spread, h);
  Json sj;
  for (int k = 0; k < m.tree.num_nodes(); ++k) sj[node_id(m.tree, k)] = solvent[static_cast<std::size_t>(k)];
  report["self_financing"] = std::move(sj);
  emit(opt, report);
  return kExitOk;
}

int run_fuzz_cmd(const Options& opt) {
  fuzz::GenOptions gen;
  const auto report = fuzz::run_fuzz(opt.seed, opt.count, gen, thread_cap());
  std::cout << fuzz::format_report(report);
  return report.violations == 0 ? kExitOk : kExitEngineBug;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact no-arbitrage and superhedging engine for bid-ask scenario trees"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&](CLI::App* cmd, bool wants_market) {
    if (wants_market)
      cmd->add_option("market", opt.market_path, "market file (JSON)")->required();
    cmd->add_option("--decimal", opt.decimal_digits,
                    "add k-digit decimal renderings next to exact values");
    cmd->add_option("--out", opt.report_path, "write the report to a file instead of stdout");
  };

  auto* check = app.add_subcommand("check", "decide robust no-arbitrage with a certificate");
  add_common(check, true);
  check->add_option("--eps", opt.eps_text, "pin the shrink parameter (p/q in (0,1/2))");
  check->add_option("--delta", opt.delta_text, "arbitrage margin parameter");
  check->add_flag("--verify", opt.verify, "re-verify the certificate before exiting");
  check->add_option("--verify-report", opt.verify_report_path,
                    "verify a previously saved report instead of recomputing");
  check->add_option("--dump-supports", opt.supports_path,
                    "write the support sets and stopping profile to a file");

  auto* cps = app.add_subcommand("cps", "construct a strictly consistent price system");
  add_common(cps, true);
  cps->add_option("--eps", opt.eps_text, "shrink parameter (default 1/8)");

  auto* sup = app.add_subcommand("superhedge", "price and superhedge a terminal claim");
  add_common(sup, true);
  sup->add_option("--claim", opt.claim_path, "claim file {leaf id -> payoff}");
  sup->add_flag("--verify", opt.verify, "re-verify the report before exiting");
  sup->add_option("--verify-report", opt.verify_report_path,
                  "verify a previously saved report instead of recomputing");
  sup->add_option("--dump-supports", opt.supports_path,
                  "write the support sets and stopping profile to a file");

  auto* omega = app.add_subcommand("omega-star", "efficient support of the price systems");
  add_common(omega, true);

  auto* oracle = app.add_subcommand("oracle", "dual price over all consistent price systems");
  add_common(oracle, true);
  oracle->add_option("--claim", opt.claim_path, "claim file {leaf id -> payoff}");

  auto* value = app.add_subcommand("value", "terminal value of a strategy");
  add_common(value, true);
  value->add_option("--strategy", opt.strategy_path, "strategy file {node id -> holdings}")
      ->required();
  value->add_option("--prices", opt.price_path,
                    "optional frictionless price process for the integral comparison");

  auto* fz = app.add_subcommand("fuzz", "seeded random-market self-test");
  add_common(fz, false);
  fz->add_option("--seed", opt.seed, "random seed (fully determines the run)");
  fz->add_option("--count", opt.count, "number of markets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) {
      if (!opt.verify_report_path.empty()) return run_verify_report(opt);
      return run_check(opt);
    }
    if (cps->parsed()) return run_cps(opt);
    if (sup->parsed()) {
      if (!opt.verify_report_path.empty()) return run_verify_report(opt);
      return run_superhedge(opt);
    }
    if (omega->parsed()) return run_omega_star(opt);
    if (oracle->parsed()) return run_oracle(opt);
    if (value->parsed()) return run_value(opt);
    if (fz->parsed()) return run_fuzz_cmd(opt);
  } catch (const input_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const internal_error& e) {
    std::cerr << "internal error (engine bug): " << e.what() << "\n";
    return kExitEngineBug;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}

#pragma once

#include <nlohmann/json_fwd.hpp>

#include <string>

#include "frictionlab/market.hpp"

// Structured-text (JSON, UTF-8) market/strategy/claim files.  All numbers are
// exact rationals written as strings "p/q" (integers and finite decimals are
// accepted on input and converted exactly).

namespace frictionlab::market_io {

using Json = nlohmann::ordered_json;

struct MarketData {
  market::ScenarioTree tree;
  market::BidAskProcess spread;
  market::Claim claim;  // empty when the file carries none
  bool has_claim = false;
};

MarketData parse_market(const Json& j);
MarketData load_market(const std::string& path);
Json market_to_json(const MarketData& m);

market::Claim parse_claim(const market::ScenarioTree& tree, const Json& j);
market::Claim load_claim(const market::ScenarioTree& tree, const std::string& path);

market::Strategy parse_strategy(const market::ScenarioTree& tree, Eigen::Index assets,
                                const Json& j);
market::Strategy load_strategy(const market::ScenarioTree& tree, Eigen::Index assets,
                               const std::string& path);
Json strategy_to_json(const market::ScenarioTree& tree, const market::Strategy& h);

std::vector<Vec> parse_price_process(const market::ScenarioTree& tree, Eigen::Index assets,
                                     const Json& j);
std::vector<Vec> load_price_process(const market::ScenarioTree& tree, Eigen::Index assets,
                                    const std::string& path);

Json rational_array(const Vec& v);
Vec parse_rational_array(const Json& j, Eigen::Index expected);

// Adds a "<key>_decimal" twin next to every exact rational field, k digits;
// exact values are never replaced.
void decorate_decimals(Json& j, int digits);

Json load_json(const std::string& path);
void save_json(const std::string& path, const Json& j);

}  // namespace frictionlab::market_io

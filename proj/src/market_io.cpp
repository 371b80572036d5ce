#include "frictionlab/market_io.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace frictionlab::market_io {

namespace {

Rational number_from(const Json& j, const std::string& where) {
  try {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_number_unsigned()) return Rational(j.get<unsigned long long>());
  } catch (const input_error& e) {
    throw input_error(where + ": " + e.what());
  }
  throw input_error(where + ": expected an exact number (\"p/q\", integer, or decimal string)");
}

const Json& field(const Json& j, const std::string& key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) throw input_error(where + ": missing field '" + key + "'");
  return *it;
}

}  // namespace

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const std::exception& e) {
    throw input_error(path + ": " + e.what());
  }
  return j;
}

void save_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

Vec parse_rational_array(const Json& j, Eigen::Index expected) {
  if (!j.is_array()) throw input_error("expected an array of rationals");
  if (expected >= 0 && static_cast<Eigen::Index>(j.size()) != expected)
    throw input_error("expected " + std::to_string(expected) + " entries, got " +
                      std::to_string(j.size()));
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = number_from(j[static_cast<std::size_t>(i)], "array entry");
  return v;
}

Json rational_array(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_string(v(i)));
  return out;
}

MarketData parse_market(const Json& j) {
  MarketData m;
  if (!j.is_object()) throw input_error("market: top level must be an object");
  const Eigen::Index d = field(j, "assets", "market").get<Eigen::Index>();
  if (d <= 0) throw input_error("market: assets must be positive");
  m.spread.assets = d;
  m.tree.horizon = field(j, "horizon", "market").get<int>();
  if (m.tree.horizon < 0) throw input_error("market: horizon must be nonnegative");

  const Json& nodes = field(j, "nodes", "market");
  if (!nodes.is_array() || nodes.empty()) throw input_error("market: nodes must be a nonempty array");

  std::map<std::string, int> index;
  for (const auto& nj : nodes) {
    const std::string id = field(nj, "id", "node").get<std::string>();
    if (index.count(id)) throw input_error("market: duplicate node id '" + id + "'");
    const int k = static_cast<int>(m.tree.nodes.size());
    index[id] = k;

    market::ScenarioTree::Node node;
    node.id = id;
    const auto pit = nj.find("parent");
    if (pit == nj.end() || pit->is_null() || (pit->is_string() && pit->get<std::string>().empty())) {
      node.parent = -1;
      node.depth = 0;
      if (k != 0) throw input_error("market: node '" + id + "' is a second root");
    } else {
      const std::string pid = pit->get<std::string>();
      const auto found = index.find(pid);
      if (found == index.end())
        throw input_error("market: node '" + id + "' references unknown parent '" + pid +
                          "' (parents must appear first)");
      node.parent = found->second;
      node.depth = m.tree.nodes[static_cast<std::size_t>(node.parent)].depth + 1;
      m.tree.nodes[static_cast<std::size_t>(node.parent)].children.push_back(k);
    }
    m.tree.nodes.push_back(std::move(node));

    geometry::Box b;
    b.lo = parse_rational_array(field(nj, "bid", "node '" + id + "'"), d);
    b.hi = parse_rational_array(field(nj, "ask", "node '" + id + "'"), d);
    m.spread.box.push_back(std::move(b));
  }
  for (int k = 0; k < m.tree.num_nodes(); ++k)
    if (m.tree.is_leaf(k)) m.tree.leaves.push_back(k);

  if (const auto it = j.find("claim"); it != j.end() && !it->is_null()) {
    m.claim = parse_claim(m.tree, *it);
    m.has_claim = true;
  }
  return m;
}

MarketData load_market(const std::string& path) { return parse_market(load_json(path)); }

Json market_to_json(const MarketData& m) {
  Json j;
  j["assets"] = m.spread.assets;
  j["horizon"] = m.tree.horizon;
  Json nodes = Json::array();
  for (int k = 0; k < m.tree.num_nodes(); ++k) {
    const auto& n = m.tree.nodes[static_cast<std::size_t>(k)];
    Json nj;
    nj["id"] = n.id;
    if (n.parent < 0) {
      nj["parent"] = nullptr;
    } else {
      nj["parent"] = m.tree.nodes[static_cast<std::size_t>(n.parent)].id;
    }
    nj["bid"] = rational_array(m.spread.at(k).lo);
    nj["ask"] = rational_array(m.spread.at(k).hi);
    nodes.push_back(std::move(nj));
  }
  j["nodes"] = std::move(nodes);
  if (m.has_claim) {
    Json cj;
    for (int leaf : m.tree.leaves)
      cj[m.tree.nodes[static_cast<std::size_t>(leaf)].id] = to_string(m.claim.at(leaf));
    j["claim"] = std::move(cj);
  }
  return j;
}

market::Claim parse_claim(const market::ScenarioTree& tree, const Json& j) {
  if (!j.is_object()) throw input_error("claim: expected {leaf id -> payoff}");
  market::Claim claim;
  for (const auto& [id, value] : j.items()) {
    const int k = tree.index_of(id);
    if (k < 0) throw input_error("claim: unknown leaf '" + id + "'");
    if (!tree.is_leaf(k)) throw input_error("claim: node '" + id + "' is not a leaf");
    claim.payoff[k] = number_from(value, "claim at '" + id + "'");
  }
  for (int leaf : tree.leaves) {
    if (!claim.payoff.count(leaf))
      throw input_error("claim: missing payoff for leaf '" +
                        tree.nodes[static_cast<std::size_t>(leaf)].id + "'");
  }
  return claim;
}

market::Claim load_claim(const market::ScenarioTree& tree, const std::string& path) {
  const Json j = load_json(path);
  // allow either a bare map or a market-file-shaped {"claim": {...}}
  if (j.is_object() && j.contains("claim")) return parse_claim(tree, j["claim"]);
  return parse_claim(tree, j);
}

market::Strategy parse_strategy(const market::ScenarioTree& tree, Eigen::Index assets,
                                const Json& j) {
  if (!j.is_object()) throw input_error("strategy: expected {node id -> holdings}");
  market::Strategy h = market::zero_strategy(tree, assets);
  for (const auto& [id, value] : j.items()) {
    const int k = tree.index_of(id);
    if (k < 0) throw input_error("strategy: unknown node '" + id + "'");
    if (tree.is_leaf(k))
      throw input_error("strategy: node '" + id + "' is a leaf; the terminal position is fixed at zero");
    h.holding[static_cast<std::size_t>(k)] = parse_rational_array(value, assets);
  }
  return h;
}

market::Strategy load_strategy(const market::ScenarioTree& tree, Eigen::Index assets,
                               const std::string& path) {
  return parse_strategy(tree, assets, load_json(path));
}

Json strategy_to_json(const market::ScenarioTree& tree, const market::Strategy& h) {
  Json j;
  for (int k = 0; k < tree.num_nodes(); ++k) {
    if (tree.is_leaf(k)) continue;
    j[tree.nodes[static_cast<std::size_t>(k)].id] = rational_array(h.at(k));
  }
  return j;
}

std::vector<Vec> parse_price_process(const market::ScenarioTree& tree, Eigen::Index assets,
                                     const Json& j) {
  if (!j.is_object()) throw input_error("price process: expected {node id -> price vector}");
  std::vector<Vec> s(static_cast<std::size_t>(tree.num_nodes()));
  std::vector<bool> seen(static_cast<std::size_t>(tree.num_nodes()), false);
  for (const auto& [id, value] : j.items()) {
    const int k = tree.index_of(id);
    if (k < 0) throw input_error("price process: unknown node '" + id + "'");
    s[static_cast<std::size_t>(k)] = parse_rational_array(value, assets);
    seen[static_cast<std::size_t>(k)] = true;
  }
  for (int k = 0; k < tree.num_nodes(); ++k) {
    if (!seen[static_cast<std::size_t>(k)])
      throw input_error("price process: missing node '" +
                        tree.nodes[static_cast<std::size_t>(k)].id + "'");
  }
  return s;
}

std::vector<Vec> load_price_process(const market::ScenarioTree& tree, Eigen::Index assets,
                                    const std::string& path) {
  return parse_price_process(tree, assets, load_json(path));
}

void decorate_decimals(Json& j, int digits) {
  if (j.is_object()) {
    std::vector<std::pair<std::string, Json>> twins;
    for (auto& [key, value] : j.items()) {
      if (value.is_string()) {
        try {
          twins.emplace_back(key + "_decimal",
                             decimal_string(parse_rational(value.get<std::string>()), digits));
        } catch (const input_error&) {
        }
      } else if (value.is_array() && !value.empty() && value.front().is_string()) {
        Json arr = Json::array();
        bool all = true;
        for (const auto& e : value) {
          if (!e.is_string()) {
            all = false;
            break;
          }
          try {
            arr.push_back(decimal_string(parse_rational(e.get<std::string>()), digits));
          } catch (const input_error&) {
            all = false;
            break;
          }
        }
        if (all) twins.emplace_back(key + "_decimal", std::move(arr));
      }
      decorate_decimals(value, digits);
    }
    for (auto& [key, value] : twins) j[key] = std::move(value);
  } else if (j.is_array()) {
    for (auto& e : j) decorate_decimals(e, digits);
  }
}

}  // namespace frictionlab::market_io

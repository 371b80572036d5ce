#include "frictionlab/support_sets.hpp"

namespace frictionlab::support_sets {

SupportSets compute(const market::ScenarioTree& tree, const market::BidAskProcess& spread) {
  const Eigen::Index d = spread.assets;
  SupportSets sets;
  sets.support.assign(static_cast<std::size_t>(tree.num_nodes()), geometry::Polytope::empty_set(d));
  sets.conv_children.assign(static_cast<std::size_t>(tree.num_nodes()),
                            geometry::Polytope::empty_set(d));

  // children precede nothing: nodes are stored parent-first, so reverse order
  // is a valid backward sweep
  for (int k = tree.num_nodes() - 1; k >= 0; --k) {
    if (tree.is_leaf(k)) {
      sets.support[static_cast<std::size_t>(k)] =
          geometry::Polytope{d, spread.at(k).corners()};
      continue;
    }
    std::vector<Vec> pool;
    for (int c : tree.nodes[static_cast<std::size_t>(k)].children) {
      const auto& child = sets.support[static_cast<std::size_t>(c)];
      pool.insert(pool.end(), child.vertices.begin(), child.vertices.end());
    }
    auto& hull_k = sets.conv_children[static_cast<std::size_t>(k)];
    hull_k = geometry::hull(d, pool);
    if (!hull_k.empty())
      sets.support[static_cast<std::size_t>(k)] = geometry::intersect(hull_k, spread.at(k));
  }
  return sets;
}

TauProfile tau(const market::ScenarioTree& tree, const SupportSets& sets) {
  TauProfile profile;
  profile.tau_by_leaf.reserve(tree.leaves.size());
  for (int leaf : tree.leaves) {
    std::vector<int> path;
    for (int k = leaf; k >= 0; k = tree.nodes[static_cast<std::size_t>(k)].parent)
      path.push_back(k);
    std::optional<int> hit;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      const int k = *it;
      if (sets.at(k).empty() && !sets.hull_at(k).empty()) {
        hit = tree.nodes[static_cast<std::size_t>(k)].depth;
        break;
      }
    }
    profile.tau_by_leaf.push_back(hit);
  }
  return profile;
}

Vec boundary_process(const Vec& holding, const geometry::Box& box) {
  Vec s(holding.size());
  for (Eigen::Index j = 0; j < holding.size(); ++j)
    s(j) = holding(j) >= 0 ? box.lo(j) : box.hi(j);
  return s;
}

}  // namespace frictionlab::support_sets

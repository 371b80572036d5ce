#pragma once

#include "frictionlab/market.hpp"

namespace frictionlab::support_sets {

// Backward sweep: leaves carry their bid-ask box; an internal node carries
// the hull of its children's sets intersected with its own box.  On a finite
// tree the conditioning atom is the node itself, so the hull over children
// realizes the conditional set exactly and closures are vacuous.
struct SupportSets {
  std::vector<geometry::Polytope> support;        // S(n), possibly empty
  std::vector<geometry::Polytope> conv_children;  // hull of children's S vertices

  const geometry::Polytope& at(int node) const { return support[static_cast<std::size_t>(node)]; }
  const geometry::Polytope& hull_at(int node) const {
    return conv_children[static_cast<std::size_t>(node)];
  }
};

SupportSets compute(const market::ScenarioTree& tree, const market::BidAskProcess& spread);

// First time along each root-to-leaf path at which the support set dies
// while the children's hull survives; nullopt where no such time exists.
struct TauProfile {
  std::vector<std::optional<int>> tau_by_leaf;  // aligned with tree.leaves
};

TauProfile tau(const market::ScenarioTree& tree, const SupportSets& sets);

// Liquidation-price vertex of the box for the sign pattern of the position:
// long legs at the bid, short legs at the ask; zero legs at the bid.
Vec boundary_process(const Vec& holding, const geometry::Box& box);

}  // namespace frictionlab::support_sets

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "grnn/graph.hpp"

namespace grnn {

struct PageRankConfig {
  double damping = 0.85;     // weight of the link-following term
  int num_iterations = 100;  // exact round count when tolerance == 0
  double tolerance = 0.0;    // early stop on L1 change; 0 disables
};

struct PageRankScores {
  Eigen::VectorXd scores;  // non-negative, sums to 1
};

/// Power iteration on the normalized random-surfer chain: each vertex j
/// spreads its mass equally over its out-neighbors, vertices with no
/// out-edges spread theirs uniformly over the whole graph, and every vertex
/// receives a (1-damping)/|V| teleport share. Starts uniform; the score
/// vector is a probability distribution after every round.
PageRankScores pagerank(const Graph& g, const PageRankConfig& cfg);

struct HitsScores {
  Eigen::VectorXd hub;        // unit L2 norm
  Eigen::VectorXd authority;  // unit L2 norm
};

/// Runs exactly num_iterations rounds of: authority(j) = sum of hub over
/// in-neighbors, then hub(i) = sum of the fresh authority over
/// out-neighbors, then L2-normalize both vectors. Both start at all-ones.
/// Throws on an edgeless graph (normalization undefined).
HitsScores hits(const Graph& g, int num_iterations);

/// Element-wise hub + authority, the scalar used to rank vertices.
Eigen::VectorXd hits_combined_score(const HitsScores& s);

struct WLState {
  std::vector<int> labels;  // compressed labels in [0, num_classes)
  int rounds = 0;           // refinement rounds applied
  int num_classes = 0;
};

/// Color refinement over N(i) = in- and out-neighbors merged. Each round
/// maps (own label, sorted multiset of neighbor labels) through a fresh
/// dictionary compression; stops when the class count stops increasing or
/// after max_rounds. Initial labels are all zero, or compressed
/// vertex-attribute classes when the graph carries vertex attributes.
WLState weisfeiler_lehman(const Graph& g, int max_rounds);

}  // namespace grnn

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "grnn/cell.hpp"
#include "grnn/graph.hpp"
#include "grnn/heads.hpp"

namespace grnn {

/// Per-step vertex features: steps[k] is the |V| x d matrix after k
/// applications of the update function (steps[0] is the initial state).
struct FeatureState {
  std::vector<Eigen::MatrixXd> steps;

  int depth() const { return static_cast<int>(steps.size()) - 1; }
  const Eigen::MatrixXd& final() const { return steps.back(); }
};

/// Record of one unrolled forward pass, sufficient to run the reverse sweep.
struct PropagationTape {
  std::vector<std::vector<CellCache>> caches;  // K x |V|
  const Graph* graph = nullptr;
  CellParams params;  // snapshot of the parameters the pass used
  bool canonical_order = false;
};

struct ForwardOptions {
  /// Canonical per-component summation order in the aggregates; makes the
  /// whole pass equivariant to vertex relabeling bit-for-bit.
  bool canonical_order = false;
};

/// Unrolls the update K times over the whole graph, synchronously: step k
/// reads only step k-1. The initial state is all zeros, or the vertex
/// attributes copied into the leading min(p, d) feature columns when the
/// graph has them. Throws if a step produces non-finite values (diverged
/// parameters).
std::pair<FeatureState, PropagationTape> forward(const Graph& g, const CellParams& params, int K,
                                                 const ForwardOptions& options = {});

/// Reverse sweep over the unrolled computation: grad_final holds the risk
/// gradient with respect to the final features (zero rows for vertices
/// outside the loss). Each vertex's step-k gradient flows to its own
/// step-(k-1) state and, through the aggregates, to every neighbor's
/// step-(k-1) state, accumulating the parameter gradient along the way.
/// Work is Theta(K (|V| + |E|) d^2).
CellParams backward(const PropagationTape& tape, const Eigen::MatrixXd& grad_final);

/// Forward pass plus head evaluation on every vertex; no gradients.
/// Returns a |V| x t prediction matrix.
Eigen::MatrixXd apply(const Graph& g, const CellParams& params, const HeadParams& head, int K,
                      const ForwardOptions& options = {});

}  // namespace grnn

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "grnn/graph.hpp"

namespace grnn {

enum class CellKind { Sigmoid, Gru };

/// One GRU gate block: U acts on the previous vertex state, W on the stacked
/// neighborhood aggregate [phi_in; phi_out] (plus the vertex attribute when
/// present, concatenated onto that input).
struct GruBlock {
  Eigen::MatrixXd U;  // d x d
  Eigen::MatrixXd W;  // d x (2d + p)
  Eigen::VectorXd b;  // d
};

/// Parameters of the vertex-update function. The sigmoid form keeps one
/// linear map per input role; the GRU form keeps update/reset/candidate
/// blocks. Flat layout (row-major matrices, biases last per group):
///   sigmoid: W, W_in, W_out, W_attr, b
///   gru:     update(U,W,b), reset(U,W,b), candidate(U,W,b)
struct CellParams {
  CellKind kind = CellKind::Sigmoid;
  int d = 0;  // feature dimension
  int p = 0;  // vertex-attribute dimension, 0 when the graph has none

  Eigen::MatrixXd W, W_in, W_out;  // d x d each (sigmoid form)
  Eigen::MatrixXd W_attr;          // d x p (sigmoid form, present when p > 0)
  Eigen::VectorXd b;               // d (sigmoid form)

  GruBlock update, reset, candidate;  // gru form

  static CellParams zeros(CellKind kind, int d, int p);

  int num_params() const;
  void write_flat(std::span<double> out) const;
  void read_flat(std::span<const double> in);
  /// Appends one flag per flat entry: 1 for weight-matrix entries, 0 for
  /// biases (the regularizer applies to weights only).
  void append_weight_mask(std::vector<std::uint8_t>& mask) const;

  double squared_weight_norm() const;
};

/// Sums of previous-step feature vectors over the in- and out-neighborhoods.
struct Aggregates {
  Eigen::VectorXd phi_in;
  Eigen::VectorXd phi_out;
};

/// Neighborhood sums for vertex i. Empty neighbor sets give zero vectors;
/// when the graph carries edge attributes, each neighbor's row is scaled by
/// the first attribute of the connecting edge. With canonical_order set,
/// each component is summed in ascending value order, which makes the result
/// bit-identical across vertex relabelings (the multiset of summands is all
/// that matters); otherwise summation follows adjacency order.
Aggregates aggregate(const Eigen::MatrixXd& features_prev, const Graph& g, int i,
                     bool canonical_order = false);

/// Everything cell_backward needs about one forward call.
struct CellCache {
  Eigen::VectorXd phi_prev, phi_in, phi_out, attr;
  Eigen::VectorXd y;        // sigmoid: activated output
  Eigen::VectorXd z, r, c;  // gru: update gate, reset gate, candidate
};

/// One application of the update function.
///   sigmoid: sigma(W*phi_prev + W_in*phi_in + W_out*phi_out [+ W_attr*attr] + b)
///   gru:     z (.) phi_prev + (1-z) (.) tanh-candidate, standard gating with
///            input x = [phi_in; phi_out (; attr)] and state h = phi_prev
/// attr must have size p (pass an empty vector when p == 0).
Eigen::VectorXd cell_forward(const CellParams& params, const Eigen::VectorXd& phi_prev,
                             const Aggregates& agg, const Eigen::VectorXd& attr,
                             CellCache* cache = nullptr);

struct CellInputGrads {
  Eigen::VectorXd phi_prev;
  Eigen::VectorXd phi_in;
  Eigen::VectorXd phi_out;
};

/// Exact reverse-mode partials of cell_forward. Parameter gradients are
/// accumulated additively into grad_accum (same kind/d/p as params).
CellInputGrads cell_backward(const CellParams& params, const CellCache& cache,
                             const Eigen::VectorXd& grad_output, CellParams& grad_accum);

}  // namespace grnn

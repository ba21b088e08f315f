#include "grnn/propagation.hpp"

#include <stdexcept>

namespace grnn {

namespace {

Eigen::MatrixXd initial_features(const Graph& g, int d) {
  Eigen::MatrixXd phi0 = Eigen::MatrixXd::Zero(g.num_vertices(), d);
  if (g.has_vertex_attrs()) {
    const int copy = std::min(d, g.vertex_attr_dim());
    phi0.leftCols(copy) = g.vertex_attrs().leftCols(copy);
  }
  return phi0;
}

Eigen::VectorXd vertex_attr(const Graph& g, int v, int p) {
  if (p == 0) return Eigen::VectorXd();
  return g.vertex_attrs().row(v).transpose();
}

}  // namespace

std::pair<FeatureState, PropagationTape> forward(const Graph& g, const CellParams& params, int K,
                                                 const ForwardOptions& options) {
  if (K < 1) throw std::invalid_argument("forward: K must be >= 1");
  if (params.p != g.vertex_attr_dim()) {
    throw std::invalid_argument("forward: cell attribute dimension does not match graph");
  }
  const int n = g.num_vertices();
  const int d = params.d;

  FeatureState state;
  state.steps.reserve(K + 1);
  state.steps.push_back(initial_features(g, d));

  PropagationTape tape;
  tape.caches.resize(K);
  tape.graph = &g;
  tape.params = params;
  tape.canonical_order = options.canonical_order;

  for (int k = 1; k <= K; ++k) {
    const Eigen::MatrixXd& prev = state.steps[k - 1];
    Eigen::MatrixXd next(n, d);
    auto& step_caches = tape.caches[k - 1];
    step_caches.resize(n);
    for (int v = 0; v < n; ++v) {
      const Aggregates agg = aggregate(prev, g, v, options.canonical_order);
      next.row(v) = cell_forward(params, prev.row(v).transpose(), agg, vertex_attr(g, v, params.p),
                                 &step_caches[v])
                        .transpose();
    }
    if (!next.allFinite()) {
      throw std::runtime_error("forward: non-finite features at step " + std::to_string(k) +
                               " (diverged parameters)");
    }
    state.steps.push_back(std::move(next));
  }
  return {std::move(state), std::move(tape)};
}

CellParams backward(const PropagationTape& tape, const Eigen::MatrixXd& grad_final) {
  const Graph& g = *tape.graph;
  const CellParams& params = tape.params;
  const int n = g.num_vertices();
  const int d = params.d;
  const int K = static_cast<int>(tape.caches.size());
  if (grad_final.rows() != n || grad_final.cols() != d) {
    throw std::invalid_argument("backward: grad_final shape does not match tape");
  }

  const bool weighted = g.has_edge_attrs();
  CellParams grad_theta = CellParams::zeros(params.kind, d, params.p);
  Eigen::MatrixXd grad_step = grad_final;

  for (int k = K; k >= 1; --k) {
    Eigen::MatrixXd grad_prev = Eigen::MatrixXd::Zero(n, d);
    const auto& step_caches = tape.caches[k - 1];
    for (int v = 0; v < n; ++v) {
      const CellInputGrads grads =
          cell_backward(params, step_caches[v], grad_step.row(v).transpose(), grad_theta);
      grad_prev.row(v) += grads.phi_prev.transpose();
      // phi_in(v) sums in-neighbors, phi_out(v) sums out-neighbors; the
      // adjoint scatters back along the same (possibly weighted) edges.
      const auto in_neigh = g.in_neighbors(v);
      const auto in_eids = g.in_edge_ids(v);
      for (std::size_t idx = 0; idx < in_neigh.size(); ++idx) {
        const double w = weighted ? g.edge_attrs()(in_eids[idx], 0) : 1.0;
        grad_prev.row(in_neigh[idx]) += w * grads.phi_in.transpose();
      }
      const auto out_neigh = g.out_neighbors(v);
      const auto out_eids = g.out_edge_ids(v);
      for (std::size_t idx = 0; idx < out_neigh.size(); ++idx) {
        const double w = weighted ? g.edge_attrs()(out_eids[idx], 0) : 1.0;
        grad_prev.row(out_neigh[idx]) += w * grads.phi_out.transpose();
      }
    }
    grad_step.swap(grad_prev);
  }
  return grad_theta;
}

Eigen::MatrixXd apply(const Graph& g, const CellParams& params, const HeadParams& head, int K,
                      const ForwardOptions& options) {
  if (head.d != params.d) {
    throw std::invalid_argument("apply: head input size does not match cell dimension");
  }
  const auto [state, tape] = forward(g, params, K, options);
  const int n = g.num_vertices();
  Eigen::MatrixXd predictions(n, head.t_out);
  for (int v = 0; v < n; ++v) {
    predictions.row(v) = head_forward(head, state.final().row(v).transpose()).transpose();
  }
  return predictions;
}

}  // namespace grnn

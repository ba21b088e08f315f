// Independent reference implementations used only by tests. Everything here
// takes the slow-but-obvious route (dense matrices, exhaustive enumeration,
// finite differences) so it shares no code path with the library.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "grnn/graph.hpp"

namespace oracles {

// Dense power iteration for PageRank with uniform dangling redistribution
// and constant teleport, on the explicit |V| x |V| matrix.
inline Eigen::VectorXd dense_pagerank(const grnn::Graph& g, double damping, int iterations) {
  const int n = g.num_vertices();
  Eigen::MatrixXd transition = Eigen::MatrixXd::Zero(n, n);  // transition(i,j) = mass j -> i
  for (int j = 0; j < n; ++j) {
    const int deg = g.out_degree(j);
    if (deg == 0) {
      transition.col(j).setConstant(1.0 / n);
    } else {
      for (const int i : g.out_neighbors(j)) transition(i, j) += 1.0 / deg;
    }
  }
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / n);
  const Eigen::VectorXd teleport = Eigen::VectorXd::Constant(n, (1.0 - damping) / n);
  for (int it = 0; it < iterations; ++it) pi = damping * (transition * pi) + teleport;
  return pi;
}

// Dominant eigenvectors of A^T A (authority) and A A^T (hub) from a dense
// symmetric eigensolver, sign-fixed to the non-negative orientation.
struct HitsOracle {
  Eigen::VectorXd hub;
  Eigen::VectorXd authority;
  double gap_ratio;  // second/first eigenvalue of A^T A, for diagnostics
};

inline HitsOracle dense_hits(const grnn::Graph& g) {
  const int n = g.num_vertices();
  Eigen::MatrixXd adjacency = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [s, d] : g.edges()) adjacency(s, d) = 1.0;

  auto dominant = [n](const Eigen::MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    Eigen::VectorXd v = solver.eigenvectors().col(n - 1);
    if (v.sum() < 0.0) v = -v;
    const double top = solver.eigenvalues()[n - 1];
    const double second = n > 1 ? solver.eigenvalues()[n - 2] : 0.0;
    return std::make_pair(v, top > 0.0 ? second / top : 1.0);
  };

  HitsOracle oracle;
  auto [authority, gap_a] = dominant(adjacency.transpose() * adjacency);
  auto [hub, gap_h] = dominant(adjacency * adjacency.transpose());
  oracle.authority = authority;
  oracle.hub = hub;
  oracle.gap_ratio = std::max(gap_a, gap_h);
  return oracle;
}

// Exhaustive threshold enumeration for average precision: for every distinct
// score, classify >= threshold as positive by a full O(n) scan, then
// integrate precision over recall steps.
inline double brute_force_average_precision(const Eigen::VectorXd& scores,
                                            const Eigen::VectorXd& labels) {
  const int n = static_cast<int>(scores.size());
  std::vector<double> thresholds(scores.data(), scores.data() + n);
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  int total_pos = 0;
  for (int i = 0; i < n; ++i) total_pos += labels[i] == 1.0;

  double area = 0.0;
  double prev_recall = 0.0;
  for (const double threshold : thresholds) {
    int tp = 0, fp = 0;
    for (int i = 0; i < n; ++i) {
      if (scores[i] >= threshold) {
        if (labels[i] == 1.0) ++tp;
        else ++fp;
      }
    }
    const double recall = static_cast<double>(tp) / total_pos;
    const double precision = static_cast<double>(tp) / (tp + fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return area;
}

// Brute-force graph isomorphism over all vertex permutations (tiny n only).
inline bool isomorphic(const grnn::Graph& a, const grnn::Graph& b) {
  const int n = a.num_vertices();
  if (n != b.num_vertices() || a.num_edges() != b.num_edges()) return false;
  auto edge_set = [](const grnn::Graph& g) {
    std::vector<std::pair<int, int>> edges = g.edges();
    std::sort(edges.begin(), edges.end());
    return edges;
  };
  const auto target = edge_set(b);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    std::vector<std::pair<int, int>> mapped;
    mapped.reserve(a.edges().size());
    for (const auto& [s, d] : a.edges()) mapped.emplace_back(perm[s], perm[d]);
    std::sort(mapped.begin(), mapped.end());
    if (mapped == target) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

// Central finite differences of a scalar function, step h per coordinate.
inline Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double h = 1e-6) {
  Eigen::VectorXd grad(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    grad[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return grad;
}

// Relative error of an analytic gradient against the finite-difference one:
// differences under the FD noise floor count as zero, denominators never
// drop below 1% of the gradient scale.
inline double gradient_rel_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& fd) {
  const double scale = std::max(analytic.lpNorm<Eigen::Infinity>(), fd.lpNorm<Eigen::Infinity>());
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double diff = std::abs(analytic[i] - fd[i]);
    if (diff < 1e-8) continue;
    const double denom = std::max({std::abs(analytic[i]), std::abs(fd[i]), 0.01 * scale, 1e-12});
    worst = std::max(worst, diff / denom);
  }
  return worst;
}

// Shorthand used throughout the tests.
inline grnn::Graph two_cycle() {
  return grnn::Graph::from_edges(2, {{0, 1}, {1, 0}});
}

inline grnn::Graph bidirected_path(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) {
    edges.emplace_back(i, i + 1);
    edges.emplace_back(i + 1, i);
  }
  return grnn::Graph::from_edges(n, std::move(edges));
}

inline grnn::Graph bidirected_cycle(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    edges.emplace_back(i, (i + 1) % n);
    edges.emplace_back((i + 1) % n, i);
  }
  return grnn::Graph::from_edges(n, std::move(edges));
}

}  // namespace oracles

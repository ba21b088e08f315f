#include "grnn/classic.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <stdexcept>

namespace grnn {

PageRankScores pagerank(const Graph& g, const PageRankConfig& cfg) {
  const int n = g.num_vertices();
  if (n < 1) throw std::invalid_argument("pagerank: graph must have at least one vertex");
  if (cfg.damping < 0.0 || cfg.damping > 1.0) {
    throw std::invalid_argument("pagerank: damping outside [0,1]");
  }
  if (cfg.tolerance < 0.0) throw std::invalid_argument("pagerank: tolerance must be >= 0");

  const double lambda = cfg.damping;
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / n);
  Eigen::VectorXd next(n);

  for (int it = 0; it < cfg.num_iterations; ++it) {
    double dangling_mass = 0.0;
    for (int v = 0; v < n; ++v) {
      if (g.out_degree(v) == 0) dangling_mass += pi[v];
    }
    const double base = lambda * dangling_mass / n + (1.0 - lambda) / n;
    for (int v = 0; v < n; ++v) {
      double acc = 0.0;
      for (const int j : g.in_neighbors(v)) acc += pi[j] / g.out_degree(j);
      next[v] = base + lambda * acc;
    }
    const double change = (next - pi).lpNorm<1>();
    pi.swap(next);
#ifndef NDEBUG
    assert(std::abs(pi.sum() - 1.0) < 1e-12);
#endif
    if (cfg.tolerance > 0.0 && change < cfg.tolerance) break;
  }
  return PageRankScores{std::move(pi)};
}

HitsScores hits(const Graph& g, int num_iterations) {
  const int n = g.num_vertices();
  if (n < 1) throw std::invalid_argument("hits: graph must have at least one vertex");
  if (g.num_edges() == 0) {
    throw std::invalid_argument("hits: scores undefined on an edgeless graph");
  }
  if (num_iterations < 0) throw std::invalid_argument("hits: num_iterations must be >= 0");

  Eigen::VectorXd hub = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd authority = Eigen::VectorXd::Ones(n);

  for (int it = 0; it < num_iterations; ++it) {
    for (int v = 0; v < n; ++v) {
      double acc = 0.0;
      for (const int j : g.in_neighbors(v)) acc += hub[j];
      authority[v] = acc;
    }
    for (int v = 0; v < n; ++v) {
      double acc = 0.0;
      for (const int j : g.out_neighbors(v)) acc += authority[j];
      hub[v] = acc;
    }
    authority /= authority.norm();
    hub /= hub.norm();
  }
  return HitsScores{std::move(hub), std::move(authority)};
}

Eigen::VectorXd hits_combined_score(const HitsScores& s) {
  return s.hub + s.authority;
}

namespace {

// Maps each distinct key to a fresh sequential integer in first-appearance
// order; stands in for the collision-free hash the refinement assumes.
template <typename Key>
std::pair<std::vector<int>, int> compress(const std::vector<Key>& keys) {
  std::map<Key, int> dict;
  std::vector<int> out(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    auto [it, inserted] = dict.emplace(keys[i], static_cast<int>(dict.size()));
    out[i] = it->second;
  }
  return {std::move(out), static_cast<int>(dict.size())};
}

}  // namespace

WLState weisfeiler_lehman(const Graph& g, int max_rounds) {
  const int n = g.num_vertices();
  if (n < 1) throw std::invalid_argument("weisfeiler_lehman: graph must have at least one vertex");

  WLState state;
  if (g.has_vertex_attrs()) {
    std::vector<std::vector<double>> rows(n);
    for (int v = 0; v < n; ++v) {
      const auto row = g.vertex_attrs().row(v);
      rows[v].assign(row.begin(), row.end());
    }
    std::tie(state.labels, state.num_classes) = compress(rows);
  } else {
    state.labels.assign(n, 0);
    state.num_classes = 1;
  }

  for (int round = 0; round < max_rounds; ++round) {
    std::vector<std::pair<int, std::vector<int>>> signatures(n);
    for (int v = 0; v < n; ++v) {
      std::vector<int> neigh_labels;
      for (const int j : g.neighbors(v)) neigh_labels.push_back(state.labels[j]);
      std::sort(neigh_labels.begin(), neigh_labels.end());
      signatures[v] = {state.labels[v], std::move(neigh_labels)};
    }
    auto [new_labels, new_classes] = compress(signatures);
    state.labels = std::move(new_labels);
    state.rounds = round + 1;
    if (new_classes == state.num_classes) break;  // partition stabilized
    state.num_classes = new_classes;
  }
  return state;
}

}  // namespace grnn

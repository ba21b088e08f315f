#include "grnn/graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "grnn/rng.hpp"

namespace grnn {

namespace {

std::uint64_t edge_key(int src, int dst) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(src)) << 32) |
         static_cast<std::uint32_t>(dst);
}

[[noreturn]] void parse_fail(const std::string& path, int line_no, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

Graph Graph::from_edges(int num_vertices, std::vector<std::pair<int, int>> edges,
                        std::optional<Eigen::MatrixXd> vertex_attrs,
                        std::optional<Eigen::MatrixXd> edge_attrs) {
  if (num_vertices < 0) throw std::invalid_argument("num_vertices must be >= 0");
  for (const auto& [s, d] : edges) {
    if (s < 0 || s >= num_vertices || d < 0 || d >= num_vertices) {
      throw std::invalid_argument("edge endpoint (" + std::to_string(s) + "," +
                                  std::to_string(d) + ") outside [0," +
                                  std::to_string(num_vertices) + ")");
    }
  }
  if (edge_attrs && edge_attrs->rows() != static_cast<Eigen::Index>(edges.size())) {
    throw std::invalid_argument("edge_attrs row count does not match edge count");
  }
  if (vertex_attrs && vertex_attrs->rows() != num_vertices) {
    throw std::invalid_argument("vertex_attrs row count does not match num_vertices");
  }

  Graph g;
  g.num_vertices_ = num_vertices;

  // Collapse duplicate directed edges, first occurrence wins.
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges.size() * 2);
  std::vector<Eigen::Index> kept_rows;
  g.edges_.reserve(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (seen.insert(edge_key(edges[k].first, edges[k].second)).second) {
      g.edges_.push_back(edges[k]);
      kept_rows.push_back(static_cast<Eigen::Index>(k));
    } else {
      ++g.duplicates_collapsed_;
    }
  }
  if (edge_attrs) {
    Eigen::MatrixXd compact(kept_rows.size(), edge_attrs->cols());
    for (std::size_t r = 0; r < kept_rows.size(); ++r) compact.row(r) = edge_attrs->row(kept_rows[r]);
    g.edge_attrs_ = std::move(compact);
  }
  g.vertex_attrs_ = std::move(vertex_attrs);
  g.build_adjacency();
  return g;
}

void Graph::build_adjacency() {
  const int n = num_vertices_;
  out_ptr_.assign(n + 1, 0);
  in_ptr_.assign(n + 1, 0);
  for (const auto& [s, d] : edges_) {
    ++out_ptr_[s + 1];
    ++in_ptr_[d + 1];
  }
  std::partial_sum(out_ptr_.begin(), out_ptr_.end(), out_ptr_.begin());
  std::partial_sum(in_ptr_.begin(), in_ptr_.end(), in_ptr_.begin());

  out_adj_.resize(edges_.size());
  out_eid_.resize(edges_.size());
  in_adj_.resize(edges_.size());
  in_eid_.resize(edges_.size());
  std::vector<int> out_fill(out_ptr_.begin(), out_ptr_.end() - 1);
  std::vector<int> in_fill(in_ptr_.begin(), in_ptr_.end() - 1);
  for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
    const auto [s, d] = edges_[e];
    out_adj_[out_fill[s]] = d;
    out_eid_[out_fill[s]++] = e;
    in_adj_[in_fill[d]] = s;
    in_eid_[in_fill[d]++] = e;
  }

  // Sort each neighbor range by id (edge ids travel along) so adjacency
  // order does not depend on edge input order.
  auto sort_range = [](std::vector<int>& adj, std::vector<int>& eid, int lo, int hi) {
    std::vector<std::pair<int, int>> tmp;
    tmp.reserve(hi - lo);
    for (int k = lo; k < hi; ++k) tmp.emplace_back(adj[k], eid[k]);
    std::sort(tmp.begin(), tmp.end());
    for (int k = lo; k < hi; ++k) {
      adj[k] = tmp[k - lo].first;
      eid[k] = tmp[k - lo].second;
    }
  };
  for (int v = 0; v < n; ++v) {
    sort_range(out_adj_, out_eid_, out_ptr_[v], out_ptr_[v + 1]);
    sort_range(in_adj_, in_eid_, in_ptr_[v], in_ptr_[v + 1]);
  }
}

std::vector<int> Graph::neighbors(int v) const {
  const auto in = in_neighbors(v);
  const auto out = out_neighbors(v);
  std::vector<int> merged;
  merged.reserve(in.size() + out.size());
  std::set_union(in.begin(), in.end(), out.begin(), out.end(), std::back_inserter(merged));
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  return merged;
}

bool operator==(const Graph& a, const Graph& b) {
  auto attrs_equal = [](const std::optional<Eigen::MatrixXd>& x,
                        const std::optional<Eigen::MatrixXd>& y) {
    if (x.has_value() != y.has_value()) return false;
    if (!x) return true;
    return x->rows() == y->rows() && x->cols() == y->cols() && *x == *y;
  };
  return a.num_vertices_ == b.num_vertices_ && a.edges_ == b.edges_ &&
         attrs_equal(a.vertex_attrs_, b.vertex_attrs_) &&
         attrs_equal(a.edge_attrs_, b.edge_attrs_);
}

Graph load_edge_list(const std::string& path, const EdgeListOptions& options) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open edge list: " + path);

  std::vector<std::pair<std::int64_t, std::int64_t>> raw_edges;
  std::vector<double> attr_values;
  int attr_arity = -1;
  std::optional<int> header_num_vertices;

  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;
    if (line[start] == '#') {
      // Recognize the self-describing vertex-count header written by
      // save_edge_list; any other comment is skipped.
      std::istringstream hs(line.substr(start + 1));
      std::string tag;
      long long n;
      if (hs >> tag >> n && tag == "num_vertices:" && !header_num_vertices) {
        header_num_vertices = static_cast<int>(n);
      }
      continue;
    }
    std::istringstream ls(line);
    std::int64_t src, dst;
    if (!(ls >> src >> dst)) parse_fail(path, line_no, "expected two integer vertex ids");
    if (src < 0 || dst < 0) parse_fail(path, line_no, "vertex ids must be non-negative");
    std::vector<double> attrs;
    double x;
    while (ls >> x) attrs.push_back(x);
    if (!ls.eof()) parse_fail(path, line_no, "trailing non-numeric token");
    if (attr_arity < 0) {
      attr_arity = static_cast<int>(attrs.size());
    } else if (static_cast<int>(attrs.size()) != attr_arity) {
      parse_fail(path, line_no, "inconsistent edge-attribute arity (expected " +
                                    std::to_string(attr_arity) + ", got " +
                                    std::to_string(attrs.size()) + ")");
    }
    raw_edges.emplace_back(src, dst);
    attr_values.insert(attr_values.end(), attrs.begin(), attrs.end());
  }
  if (attr_arity < 0) attr_arity = 0;

  std::vector<std::pair<int, int>> edges;
  edges.reserve(raw_edges.size());
  std::vector<std::int64_t> external_ids;
  int num_vertices = 0;

  if (options.remap_ids) {
    std::unordered_map<std::int64_t, int> dict;
    auto intern = [&](std::int64_t ext) {
      auto [it, inserted] = dict.emplace(ext, static_cast<int>(external_ids.size()));
      if (inserted) external_ids.push_back(ext);
      return it->second;
    };
    for (const auto& [s, d] : raw_edges) {
      const int src = intern(s);  // sequenced before the dst lookup
      const int dst = intern(d);
      edges.emplace_back(src, dst);
    }
    num_vertices = static_cast<int>(external_ids.size());
    if (options.num_vertices) num_vertices = std::max(num_vertices, *options.num_vertices);
  } else {
    std::int64_t max_id = -1;
    for (const auto& [s, d] : raw_edges) max_id = std::max({max_id, s, d});
    const std::optional<int> override_n =
        options.num_vertices ? options.num_vertices : header_num_vertices;
    if (override_n) {
      if (max_id >= *override_n) {
        throw std::runtime_error(path + ": vertex id " + std::to_string(max_id) +
                                 " exceeds declared num_vertices " + std::to_string(*override_n));
      }
      num_vertices = *override_n;
    } else {
      num_vertices = static_cast<int>(max_id + 1);
    }
    for (const auto& [s, d] : raw_edges) edges.emplace_back(static_cast<int>(s), static_cast<int>(d));
  }

  std::optional<Eigen::MatrixXd> edge_attrs;
  if (attr_arity > 0) {
    Eigen::MatrixXd m(raw_edges.size(), attr_arity);
    for (std::size_t r = 0; r < raw_edges.size(); ++r)
      for (int c = 0; c < attr_arity; ++c) m(r, c) = attr_values[r * attr_arity + c];
    edge_attrs = std::move(m);
  }

  if (options.bidirected) {
    const std::size_t forward = edges.size();
    for (std::size_t k = 0; k < forward; ++k) edges.emplace_back(edges[k].second, edges[k].first);
    if (edge_attrs) {
      Eigen::MatrixXd doubled(2 * forward, attr_arity);
      doubled.topRows(forward) = *edge_attrs;
      doubled.bottomRows(forward) = *edge_attrs;
      edge_attrs = std::move(doubled);
    }
  }

  Graph g = Graph::from_edges(num_vertices, std::move(edges), {}, std::move(edge_attrs));
  g.external_ids_ = std::move(external_ids);
  return g;
}

void save_edge_list(const Graph& g, const std::string& path) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write edge list: " + path);
  file << "# num_vertices: " << g.num_vertices() << "\n";
  file.precision(17);
  for (std::int64_t e = 0; e < g.num_edges(); ++e) {
    const auto& [s, d] = g.edges()[e];
    file << s << " " << d;
    if (g.has_edge_attrs()) {
      for (int c = 0; c < g.edge_attr_dim(); ++c) file << " " << g.edge_attrs()(e, c);
    }
    file << "\n";
  }
}

LabeledSet load_labels(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open label file: " + path);

  LabeledSet set;
  std::vector<double> values;
  int arity = -1;
  std::unordered_set<int> seen;

  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;
    if (line[start] == '#') continue;
    std::istringstream ls(line);
    std::int64_t id;
    if (!(ls >> id) || id < 0) parse_fail(path, line_no, "expected non-negative vertex id");
    std::vector<double> row;
    double x;
    while (ls >> x) row.push_back(x);
    if (!ls.eof()) parse_fail(path, line_no, "trailing non-numeric token");
    if (row.empty()) parse_fail(path, line_no, "expected at least one label value");
    if (arity < 0) {
      arity = static_cast<int>(row.size());
    } else if (static_cast<int>(row.size()) != arity) {
      parse_fail(path, line_no, "inconsistent label arity");
    }
    if (!seen.insert(static_cast<int>(id)).second) {
      parse_fail(path, line_no, "duplicate vertex id " + std::to_string(id));
    }
    set.vertex_ids.push_back(static_cast<int>(id));
    values.insert(values.end(), row.begin(), row.end());
  }

  set.labels.resize(set.size(), std::max(arity, 0));
  for (int r = 0; r < set.size(); ++r)
    for (int c = 0; c < arity; ++c) set.labels(r, c) = values[r * arity + c];
  return set;
}

void save_labels(const LabeledSet& set, const std::string& path) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write label file: " + path);
  file.precision(17);
  for (int r = 0; r < set.size(); ++r) {
    file << set.vertex_ids[r];
    for (int c = 0; c < set.arity(); ++c) file << " " << set.labels(r, c);
    file << "\n";
  }
}

namespace {

Graph generate_erdos_renyi(const ErdosRenyi& model, Rng& rng) {
  if (model.n < 1) throw std::invalid_argument("erdos-renyi: n must be >= 1");
  if (model.p < 0.0 || model.p > 1.0) throw std::invalid_argument("erdos-renyi: p outside [0,1]");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < model.n; ++i) {
    for (int j = 0; j < model.n; ++j) {
      if (i == j) continue;
      if (rng.uniform() < model.p) edges.emplace_back(i, j);
    }
  }
  return Graph::from_edges(model.n, std::move(edges));
}

Graph generate_barabasi_albert(const BarabasiAlbert& model, Rng& rng) {
  if (model.m < 1 || model.m >= model.n) {
    throw std::invalid_argument("barabasi-albert: need 1 <= m < n");
  }
  // Seed vertices 0..m-1 start edgeless; each later vertex attaches to m
  // distinct existing vertices, chosen proportionally to degree via the
  // repeated-endpoint pool (uniformly while the pool is empty).
  std::vector<std::pair<int, int>> edges;
  std::vector<int> pool;
  for (int v = model.m; v < model.n; ++v) {
    std::vector<int> targets;
    while (static_cast<int>(targets.size()) < model.m) {
      const int t = pool.empty() ? rng.index(v) : pool[rng.index(static_cast<int>(pool.size()))];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (const int t : targets) {
      edges.emplace_back(v, t);
      edges.emplace_back(t, v);
      pool.push_back(v);
      pool.push_back(t);
    }
  }
  return Graph::from_edges(model.n, std::move(edges));
}

Graph generate_planted_partition(const PlantedPartition& model, Rng& rng) {
  if (model.n < 1 || model.k_blocks < 1 || model.k_blocks > model.n) {
    throw std::invalid_argument("planted-partition: need 1 <= k_blocks <= n");
  }
  if (model.p_in < 0.0 || model.p_in > 1.0 || model.p_out < 0.0 || model.p_out > 1.0) {
    throw std::invalid_argument("planted-partition: probabilities outside [0,1]");
  }
  // Contiguous blocks with sizes differing by at most one.
  std::vector<int> block(model.n);
  for (int v = 0; v < model.n; ++v) {
    block[v] = static_cast<int>((static_cast<std::int64_t>(v) * model.k_blocks) / model.n);
  }
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < model.n; ++i) {
    for (int j = i + 1; j < model.n; ++j) {
      const double p = block[i] == block[j] ? model.p_in : model.p_out;
      if (rng.uniform() < p) {
        edges.emplace_back(i, j);
        edges.emplace_back(j, i);
      }
    }
  }
  Eigen::MatrixXd attrs(model.n, 1);
  for (int v = 0; v < model.n; ++v) attrs(v, 0) = block[v];
  return Graph::from_edges(model.n, std::move(edges), std::move(attrs));
}

}  // namespace

Graph generate_synthetic(const SyntheticModel& model, std::uint64_t seed) {
  Rng rng = Rng(seed).stream("synth");
  return std::visit(
      [&rng](const auto& m) -> Graph {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ErdosRenyi>) return generate_erdos_renyi(m, rng);
        if constexpr (std::is_same_v<T, BarabasiAlbert>) return generate_barabasi_albert(m, rng);
        if constexpr (std::is_same_v<T, PlantedPartition>) return generate_planted_partition(m, rng);
      },
      model);
}

Graph permute_vertices(const Graph& g, std::span<const int> perm) {
  const int n = g.num_vertices();
  if (static_cast<int>(perm.size()) != n) {
    throw std::invalid_argument("permutation size does not match vertex count");
  }
  std::vector<char> hit(n, 0);
  for (const int p : perm) {
    if (p < 0 || p >= n || hit[p]) throw std::invalid_argument("perm is not a bijection on [0,|V|)");
    hit[p] = 1;
  }

  std::vector<std::pair<int, int>> edges;
  edges.reserve(g.num_edges());
  for (const auto& [s, d] : g.edges()) edges.emplace_back(perm[s], perm[d]);

  std::optional<Eigen::MatrixXd> vattrs;
  if (g.has_vertex_attrs()) {
    Eigen::MatrixXd m(n, g.vertex_attr_dim());
    for (int v = 0; v < n; ++v) m.row(perm[v]) = g.vertex_attrs().row(v);
    vattrs = std::move(m);
  }
  std::optional<Eigen::MatrixXd> eattrs;
  if (g.has_edge_attrs()) eattrs = g.edge_attrs();

  return Graph::from_edges(n, std::move(edges), std::move(vattrs), std::move(eattrs));
}

Graph drop_vertex_attrs(const Graph& g) {
  std::optional<Eigen::MatrixXd> eattrs;
  if (g.has_edge_attrs()) eattrs = g.edge_attrs();
  return Graph::from_edges(g.num_vertices(), g.edges(), {}, std::move(eattrs));
}

}  // namespace grnn

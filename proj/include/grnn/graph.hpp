#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace grnn {

/// Directed attributed graph. Vertices are dense 0-based ids; adjacency is
/// stored CSR-style in both directions with neighbor lists sorted by id so
/// that iteration order is independent of the order edges were supplied.
/// Instances are immutable after construction and safe to share across
/// threads.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from an edge list. Duplicate directed edges are collapsed
  /// (first occurrence wins, count available via duplicates_collapsed());
  /// self-loops are kept. Throws std::invalid_argument on out-of-range
  /// endpoints or attribute row-count mismatches.
  static Graph from_edges(int num_vertices,
                          std::vector<std::pair<int, int>> edges,
                          std::optional<Eigen::MatrixXd> vertex_attrs = {},
                          std::optional<Eigen::MatrixXd> edge_attrs = {});

  int num_vertices() const { return num_vertices_; }
  std::int64_t num_edges() const { return static_cast<std::int64_t>(edges_.size()); }

  /// Unique directed edges in first-seen order; edge id k is edges()[k].
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  std::span<const int> out_neighbors(int v) const {
    return {out_adj_.data() + out_ptr_[v], out_adj_.data() + out_ptr_[v + 1]};
  }
  std::span<const int> in_neighbors(int v) const {
    return {in_adj_.data() + in_ptr_[v], in_adj_.data() + in_ptr_[v + 1]};
  }
  /// Edge ids parallel to out_neighbors(v) / in_neighbors(v).
  std::span<const int> out_edge_ids(int v) const {
    return {out_eid_.data() + out_ptr_[v], out_eid_.data() + out_ptr_[v + 1]};
  }
  std::span<const int> in_edge_ids(int v) const {
    return {in_eid_.data() + in_ptr_[v], in_eid_.data() + in_ptr_[v + 1]};
  }

  int out_degree(int v) const { return out_ptr_[v + 1] - out_ptr_[v]; }
  int in_degree(int v) const { return in_ptr_[v + 1] - in_ptr_[v]; }

  /// N(v): union of in- and out-neighbors, sorted, deduplicated. Computed on
  /// demand by merging the two sorted lists.
  std::vector<int> neighbors(int v) const;

  bool has_vertex_attrs() const { return vertex_attrs_.has_value(); }
  bool has_edge_attrs() const { return edge_attrs_.has_value(); }
  const Eigen::MatrixXd& vertex_attrs() const { return *vertex_attrs_; }
  const Eigen::MatrixXd& edge_attrs() const { return *edge_attrs_; }
  int vertex_attr_dim() const {
    return vertex_attrs_ ? static_cast<int>(vertex_attrs_->cols()) : 0;
  }
  int edge_attr_dim() const {
    return edge_attrs_ ? static_cast<int>(edge_attrs_->cols()) : 0;
  }

  /// Number of duplicate directed edges dropped at construction. Ingestion
  /// metadata; not part of the graph value (excluded from operator==).
  std::size_t duplicates_collapsed() const { return duplicates_collapsed_; }

  /// When ingestion remapped sparse external ids, external_ids()[v] is the
  /// original id of vertex v. Empty for identity mappings.
  const std::vector<std::int64_t>& external_ids() const { return external_ids_; }

  friend bool operator==(const Graph& a, const Graph& b);

 private:
  friend Graph load_edge_list(const std::string&, const struct EdgeListOptions&);

  void build_adjacency();

  int num_vertices_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<int> out_ptr_, out_adj_, out_eid_;
  std::vector<int> in_ptr_, in_adj_, in_eid_;
  std::optional<Eigen::MatrixXd> vertex_attrs_;
  std::optional<Eigen::MatrixXd> edge_attrs_;
  std::size_t duplicates_collapsed_ = 0;
  std::vector<std::int64_t> external_ids_;
};

/// Labeled vertex subset: distinct vertex ids paired with label rows.
/// Label arity t is 1 for PageRank and classification targets, 2 for HITS.
struct LabeledSet {
  std::vector<int> vertex_ids;
  Eigen::MatrixXd labels;  // size() x arity()

  int size() const { return static_cast<int>(vertex_ids.size()); }
  int arity() const { return static_cast<int>(labels.cols()); }
};

struct EdgeListOptions {
  std::optional<int> num_vertices;  // override; default is 1 + max id seen
  bool bidirected = false;          // emit (dst,src) for every (src,dst)
  bool remap_ids = false;           // dictionary-compress sparse external ids
};

/// Parses a whitespace-delimited edge-list file: `src dst [attr...]` per
/// line, `#` comments. A leading `# num_vertices: N` comment acts as an
/// override when the options give none (written by save_edge_list so that
/// trailing isolated vertices survive a round trip).
Graph load_edge_list(const std::string& path, const EdgeListOptions& options = {});
void save_edge_list(const Graph& g, const std::string& path);

/// Parses `vertex_id value [value...]` per line; all rows must share one
/// arity and vertex ids must be distinct.
LabeledSet load_labels(const std::string& path);
void save_labels(const LabeledSet& set, const std::string& path);

struct ErdosRenyi {
  int n;
  double p;  // independent Bernoulli per ordered pair, no self-loops
};
struct BarabasiAlbert {
  int n;
  int m;  // preferential attachment; each undirected edge emitted both ways
};
struct PlantedPartition {
  int n;
  int k_blocks;
  double p_in;
  double p_out;  // per unordered pair; both directions emitted
};
using SyntheticModel = std::variant<ErdosRenyi, BarabasiAlbert, PlantedPartition>;

/// Deterministic given (model, seed). Planted-partition graphs carry the
/// ground-truth block of each vertex as a one-column vertex attribute.
Graph generate_synthetic(const SyntheticModel& model, std::uint64_t seed);

/// Relabels vertices: vertex v becomes perm[v]. Edge order and attribute
/// alignment are preserved, so permuting by perm and then by its inverse
/// reproduces the original graph value exactly.
Graph permute_vertices(const Graph& g, std::span<const int> perm);

/// Copy without vertex attributes (structure-only view of an attributed
/// graph, e.g. when attributes serve as labels rather than inputs).
Graph drop_vertex_attrs(const Graph& g);

}  // namespace grnn

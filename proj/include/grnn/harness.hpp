#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "grnn/cell.hpp"
#include "grnn/graph.hpp"
#include "grnn/heads.hpp"
#include "grnn/optimizer.hpp"
#include "grnn/propagation.hpp"
#include "grnn/rng.hpp"

namespace grnn {

enum class Task { PagerankRegression, HitsRegression, Classification };

std::string to_string(Task task);
Task task_from_string(const std::string& name);

int task_output_arity(Task task);      // 1, 2, 1
HeadKind task_head_kind(Task task);    // regression, regression, classification
LossKind task_loss_kind(Task task);    // squared L2 twice, cross-entropy

/// One experiment configuration. graph_source/label_source are carried for
/// provenance in reports; the operations below take data explicitly.
struct TrainSpec {
  Task task = Task::PagerankRegression;
  CellKind cell = CellKind::Sigmoid;
  int d = 5;
  int K = 6;
  double l2_coeff = 0.0;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  bool deterministic = false;  // canonical aggregation order throughout
  std::string graph_source;
  std::string label_source;
};

/// Cell and head parameters optimized jointly as one flat vector; the flat
/// order is cell first, then head, each in its documented layout.
struct ParamPack {
  CellParams cell;
  HeadParams head;

  int total_params() const { return cell.num_params() + head.num_params(); }
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& x);
  std::vector<std::uint8_t> weight_mask() const;
  double squared_weight_norm() const {
    return cell.squared_weight_norm() + head.squared_weight_norm();
  }
};

/// Weight matrices sampled i.i.d. uniform in [-1/sqrt(rows), 1/sqrt(rows)]
/// (each matrix uses its own row count); biases start at zero. Deterministic
/// given the seed. attr_dim is the graph's vertex-attribute dimension.
ParamPack init_params(const TrainSpec& spec, int attr_dim, std::uint64_t seed);

/// Full-batch risk over the labeled set as a flat-vector objective:
/// unpack, K-step forward, head on labeled vertices, mean loss plus L2
/// weight decay, then reverse sweep for the exact gradient.
Objective make_objective(const Graph& g, const LabeledSet& labeled, const TrainSpec& spec,
                         const ParamPack& shapes);

struct TrainResult {
  CellParams cell;
  HeadParams head;
  std::vector<IterationRecord> trace;
  double initial_risk = 0.0;
  double final_risk = 0.0;
  TerminationReason reason = TerminationReason::MaxIterations;
};

TrainResult train(const Graph& g, const LabeledSet& labeled, const TrainSpec& spec);

/// Oracle-generated labels: PageRank scores (damping 0.85) or [hub,
/// authority] pairs, each from 1,000 iterations, over every vertex.
/// Classification reads the ground-truth block attribute the
/// planted-partition generator stores.
LabeledSet make_targets(const Graph& g, Task task);

/// Scores trained parameters on an evaluation set: MAE at ranks
/// {10,100,1000,all} for ranking tasks (HITS ranked by hub+authority),
/// AUC-PR for classification.
EvalReport evaluate(const Graph& g, const LabeledSet& eval_set, const CellParams& cell,
                    const HeadParams& head, const TrainSpec& spec);

/// Contiguous chunks of a seeded shuffle; sizes differ by at most one.
/// Returned index lists partition [0, m).
std::vector<std::vector<int>> make_folds(int m, int folds, Rng rng);

struct GridPointResult {
  TrainSpec spec;
  std::vector<double> fold_metrics;
  double mean_metric = 0.0;
  double stddev_metric = 0.0;
};

struct CvResult {
  std::vector<GridPointResult> grid;
  int winner_index = -1;
  double heldout_metric = 0.0;
  EvalReport heldout_report;
  CellParams winner_cell;
  HeadParams winner_head;
  std::vector<int> heldout_rows;  // row indices of `labeled` kept out of CV
};

/// Reserves heldout_fraction of the labeled set (seeded shuffle), k-fold
/// cross-validates every grid point on the rest (selection metric: mean
/// validation loss for regression, validation AUC-PR for classification),
/// retrains the winner on the whole CV pool and scores it on the held-out
/// rows. heldout_fraction = 0 folds the entire labeled set and skips the
/// final held-out evaluation.
CvResult cross_validate(const Graph& g, const LabeledSet& labeled,
                        const std::vector<TrainSpec>& grid, int folds, std::uint64_t seed,
                        double heldout_fraction = 0.1);

/// Rows of `labeled` restricted to the given positions.
LabeledSet subset(const LabeledSet& labeled, const std::vector<int>& rows);

void write_trace_csv(const std::string& path, const std::vector<IterationRecord>& trace);

}  // namespace grnn

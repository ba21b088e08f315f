#include "grnn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "grnn/classic.hpp"

namespace grnn {

std::string to_string(Task task) {
  switch (task) {
    case Task::PagerankRegression: return "pagerank-regression";
    case Task::HitsRegression: return "hits-regression";
    case Task::Classification: return "classification";
  }
  return "unknown";
}

Task task_from_string(const std::string& name) {
  if (name == "pagerank-regression" || name == "pagerank") return Task::PagerankRegression;
  if (name == "hits-regression" || name == "hits") return Task::HitsRegression;
  if (name == "classification") return Task::Classification;
  throw std::invalid_argument("unknown task: " + name);
}

int task_output_arity(Task task) { return task == Task::HitsRegression ? 2 : 1; }

HeadKind task_head_kind(Task task) {
  return task == Task::Classification ? HeadKind::Classification : HeadKind::Regression;
}

LossKind task_loss_kind(Task task) {
  return task == Task::Classification ? LossKind::CrossEntropy : LossKind::SquaredL2;
}

Eigen::VectorXd ParamPack::flatten() const {
  Eigen::VectorXd x(total_params());
  cell.write_flat({x.data(), static_cast<std::size_t>(cell.num_params())});
  head.write_flat({x.data() + cell.num_params(), static_cast<std::size_t>(head.num_params())});
  return x;
}

void ParamPack::unflatten(const Eigen::VectorXd& x) {
  if (x.size() != total_params()) throw std::invalid_argument("unflatten: size mismatch");
  cell.read_flat({x.data(), static_cast<std::size_t>(cell.num_params())});
  head.read_flat({x.data() + cell.num_params(), static_cast<std::size_t>(head.num_params())});
}

std::vector<std::uint8_t> ParamPack::weight_mask() const {
  std::vector<std::uint8_t> mask;
  mask.reserve(total_params());
  cell.append_weight_mask(mask);
  head.append_weight_mask(mask);
  return mask;
}

namespace {

void fill_uniform(Eigen::MatrixXd& m, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-bound, bound);
}

}  // namespace

ParamPack init_params(const TrainSpec& spec, int attr_dim, std::uint64_t seed) {
  ParamPack pack;
  pack.cell = CellParams::zeros(spec.cell, spec.d, attr_dim);
  pack.head = HeadParams::zeros(task_head_kind(spec.task), spec.d, task_output_arity(spec.task));

  Rng rng = Rng(seed).stream("init");
  if (spec.cell == CellKind::Sigmoid) {
    fill_uniform(pack.cell.W, rng);
    fill_uniform(pack.cell.W_in, rng);
    fill_uniform(pack.cell.W_out, rng);
    if (attr_dim > 0) fill_uniform(pack.cell.W_attr, rng);
  } else {
    for (GruBlock* blk : {&pack.cell.update, &pack.cell.reset, &pack.cell.candidate}) {
      fill_uniform(blk->U, rng);
      fill_uniform(blk->W, rng);
    }
  }
  if (pack.head.kind == HeadKind::Regression) fill_uniform(pack.head.W_hidden, rng);
  fill_uniform(pack.head.W_out, rng);
  return pack;
}

Objective make_objective(const Graph& g, const LabeledSet& labeled, const TrainSpec& spec,
                         const ParamPack& shapes) {
  if (labeled.size() == 0) throw std::invalid_argument("objective: empty labeled set");
  for (const int v : labeled.vertex_ids) {
    if (v < 0 || v >= g.num_vertices()) {
      throw std::invalid_argument("objective: labeled vertex id out of range");
    }
  }
  if (labeled.arity() != task_output_arity(spec.task)) {
    throw std::invalid_argument("objective: label arity does not match task");
  }

  // Shared state captured by value where cheap, by need elsewhere.
  const LossKind loss = task_loss_kind(spec.task);
  const std::vector<std::uint8_t> mask = shapes.weight_mask();
  const ForwardOptions fwd_options{spec.deterministic};
  const double l2 = spec.l2_coeff;

  return [&g, labeled, spec, shapes, loss, mask, fwd_options, l2](
             const Eigen::VectorXd& x, Eigen::VectorXd& grad) -> double {
    ParamPack pack = shapes;
    pack.unflatten(x);
    grad = Eigen::VectorXd::Zero(x.size());

    FeatureState state;
    PropagationTape tape;
    try {
      std::tie(state, tape) = forward(g, pack.cell, spec.K, fwd_options);
    } catch (const std::runtime_error&) {
      // Diverged features on a trial point: report an infinite value and let
      // the line search back off.
      return std::numeric_limits<double>::infinity();
    }

    const int m = labeled.size();
    const int t = task_output_arity(spec.task);
    Eigen::MatrixXd predictions(m, t);
    std::vector<HeadCache> head_caches(m);
    for (int r = 0; r < m; ++r) {
      const int v = labeled.vertex_ids[r];
      predictions.row(r) =
          head_forward(pack.head, state.final().row(v).transpose(), &head_caches[r]).transpose();
    }

    const RiskResult risk =
        empirical_risk(predictions, labeled.labels, loss, l2, pack.squared_weight_norm());
    if (!std::isfinite(risk.value)) return std::numeric_limits<double>::infinity();

    // Reverse sweep: head first, then backpropagation through structure.
    ParamPack grads;
    grads.cell = CellParams::zeros(pack.cell.kind, pack.cell.d, pack.cell.p);
    grads.head = HeadParams::zeros(pack.head.kind, pack.head.d, pack.head.t_out);
    Eigen::MatrixXd grad_final = Eigen::MatrixXd::Zero(g.num_vertices(), spec.d);
    for (int r = 0; r < m; ++r) {
      const int v = labeled.vertex_ids[r];
      Eigen::VectorXd grad_phi;
      if (loss == LossKind::CrossEntropy) {
        // Exact sigmoid/cross-entropy composition in logit space.
        const double grad_logit =
            ce_logit_grad(predictions(r, 0), labeled.labels(r, 0)) / m;
        grad_phi = head_backward_logit(pack.head, head_caches[r], grad_logit, grads.head);
      } else {
        grad_phi = head_backward(pack.head, head_caches[r], risk.grad_pred.row(r).transpose(),
                                 grads.head);
      }
      grad_final.row(v) += grad_phi.transpose();
    }
    grads.cell = backward(tape, grad_final);

    grad = grads.flatten();
    if (l2 > 0.0) {
      for (int i = 0; i < static_cast<int>(mask.size()); ++i) {
        if (mask[i]) grad[i] += 2.0 * l2 * x[i];
      }
    }
    return risk.value;
  };
}

TrainResult train(const Graph& g, const LabeledSet& labeled, const TrainSpec& spec) {
  ParamPack pack = init_params(spec, g.vertex_attr_dim(), spec.seed);
  const Objective objective = make_objective(g, labeled, spec, pack);

  Eigen::VectorXd x0 = pack.flatten();
  Eigen::VectorXd g0(x0.size());
  const double initial_risk = objective(x0, g0);
  if (!std::isfinite(initial_risk)) {
    throw std::runtime_error("train: non-finite risk at initialization");
  }

  MinimizeResult minimized = minimize(objective, std::move(x0), spec.optimizer);
  pack.unflatten(minimized.x);

  TrainResult result;
  result.cell = std::move(pack.cell);
  result.head = std::move(pack.head);
  result.trace = std::move(minimized.trace);
  result.initial_risk = initial_risk;
  result.final_risk = minimized.value;
  result.reason = minimized.reason;
  return result;
}

LabeledSet make_targets(const Graph& g, Task task) {
  const int n = g.num_vertices();
  LabeledSet set;
  set.vertex_ids.resize(n);
  std::iota(set.vertex_ids.begin(), set.vertex_ids.end(), 0);

  switch (task) {
    case Task::PagerankRegression: {
      const PageRankScores scores = pagerank(g, {0.85, 1000, 0.0});
      set.labels = scores.scores;
      break;
    }
    case Task::HitsRegression: {
      const HitsScores scores = hits(g, 1000);
      set.labels.resize(n, 2);
      set.labels.col(0) = scores.hub;
      set.labels.col(1) = scores.authority;
      break;
    }
    case Task::Classification: {
      if (!g.has_vertex_attrs()) {
        throw std::invalid_argument(
            "make_targets: classification needs a ground-truth vertex attribute");
      }
      set.labels = g.vertex_attrs().col(0);
      break;
    }
  }
  return set;
}

EvalReport evaluate(const Graph& g, const LabeledSet& eval_set, const CellParams& cell,
                    const HeadParams& head, const TrainSpec& spec) {
  if (eval_set.arity() != task_output_arity(spec.task)) {
    throw std::invalid_argument("evaluate: label arity does not match task");
  }
  const Eigen::MatrixXd predictions = apply(g, cell, head, spec.K, {spec.deterministic});

  const int m = eval_set.size();
  EvalReport report;
  if (spec.task == Task::Classification) {
    Eigen::VectorXd p(m), y(m);
    for (int r = 0; r < m; ++r) {
      p[r] = predictions(eval_set.vertex_ids[r], 0);
      y[r] = eval_set.labels(r, 0);
    }
    report.auc_pr = auc_pr(p, y);
  } else {
    Eigen::VectorXd pred_scalar(m), true_scalar(m);
    for (int r = 0; r < m; ++r) {
      const int v = eval_set.vertex_ids[r];
      if (spec.task == Task::HitsRegression) {
        pred_scalar[r] = predictions(v, 0) + predictions(v, 1);
        true_scalar[r] = eval_set.labels(r, 0) + eval_set.labels(r, 1);
      } else {
        pred_scalar[r] = predictions(v, 0);
        true_scalar[r] = eval_set.labels(r, 0);
      }
    }
    report = mae_at_ranks(pred_scalar, true_scalar, {10, 100, 1000, m});
  }
  report.metadata["task"] = to_string(spec.task);
  report.metadata["cell"] = spec.cell == CellKind::Sigmoid ? "sigmoid" : "gru";
  report.metadata["d"] = std::to_string(spec.d);
  report.metadata["K"] = std::to_string(spec.K);
  report.metadata["seed"] = std::to_string(spec.seed);
  if (!spec.graph_source.empty()) report.metadata["graph"] = spec.graph_source;
  if (!spec.label_source.empty()) report.metadata["labels"] = spec.label_source;
  return report;
}

std::vector<std::vector<int>> make_folds(int m, int folds, Rng rng) {
  if (folds < 1 || m < folds) {
    throw std::invalid_argument("make_folds: need 1 <= folds <= set size");
  }
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  std::vector<std::vector<int>> out(folds);
  for (int f = 0; f < folds; ++f) {
    const int begin = static_cast<int>(static_cast<std::int64_t>(f) * m / folds);
    const int end = static_cast<int>(static_cast<std::int64_t>(f + 1) * m / folds);
    out[f].assign(order.begin() + begin, order.begin() + end);
  }
  return out;
}

LabeledSet subset(const LabeledSet& labeled, const std::vector<int>& rows) {
  LabeledSet out;
  out.vertex_ids.reserve(rows.size());
  out.labels.resize(rows.size(), labeled.arity());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.vertex_ids.push_back(labeled.vertex_ids[rows[i]]);
    out.labels.row(i) = labeled.labels.row(rows[i]);
  }
  return out;
}

namespace {

// Validation metric for one trained model on one fold. Lower-is-better for
// regression (mean loss), higher-is-better for classification (AUC-PR).
double validation_metric(const Graph& g, const LabeledSet& fold, const TrainResult& trained,
                         const TrainSpec& spec) {
  const Eigen::MatrixXd predictions =
      apply(g, trained.cell, trained.head, spec.K, {spec.deterministic});
  const int m = fold.size();
  if (spec.task == Task::Classification) {
    Eigen::VectorXd p(m), y(m);
    for (int r = 0; r < m; ++r) {
      p[r] = predictions(fold.vertex_ids[r], 0);
      y[r] = fold.labels(r, 0);
    }
    try {
      return auc_pr(p, y);
    } catch (const std::invalid_argument&) {
      return std::numeric_limits<double>::quiet_NaN();  // one-class fold
    }
  }
  double total = 0.0;
  for (int r = 0; r < m; ++r) {
    total += loss_sq(predictions.row(fold.vertex_ids[r]).transpose(),
                     fold.labels.row(r).transpose())
                 .value;
  }
  return total / m;
}

}  // namespace

CvResult cross_validate(const Graph& g, const LabeledSet& labeled,
                        const std::vector<TrainSpec>& grid, int folds, std::uint64_t seed,
                        double heldout_fraction) {
  if (grid.empty()) throw std::invalid_argument("cross_validate: empty grid");
  if (heldout_fraction < 0.0 || heldout_fraction >= 1.0) {
    throw std::invalid_argument("cross_validate: heldout_fraction outside [0,1)");
  }

  const int m = labeled.size();
  Rng fold_rng = Rng(seed).stream("folds");
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  fold_rng.shuffle(order);

  const int heldout_count = static_cast<int>(std::lround(heldout_fraction * m));
  CvResult result;
  result.heldout_rows.assign(order.begin(), order.begin() + heldout_count);
  std::vector<int> pool_rows(order.begin() + heldout_count, order.end());
  const int pool_size = static_cast<int>(pool_rows.size());
  if (pool_size < folds) {
    throw std::invalid_argument("cross_validate: labeled set smaller than fold count");
  }
  const LabeledSet pool = subset(labeled, pool_rows);

  const auto fold_rows = make_folds(pool_size, folds, fold_rng.stream("assign"));
  const bool maximize = !grid.empty() && grid.front().task == Task::Classification;

  for (const TrainSpec& spec : grid) {
    GridPointResult point;
    point.spec = spec;
    for (const auto& fold : fold_rows) {
      std::vector<int> train_rows;
      train_rows.reserve(pool_size - fold.size());
      std::vector<char> in_fold(pool_size, 0);
      for (const int r : fold) in_fold[r] = 1;
      for (int r = 0; r < pool_size; ++r) {
        if (!in_fold[r]) train_rows.push_back(r);
      }
      const TrainResult trained = train(g, subset(pool, train_rows), spec);
      point.fold_metrics.push_back(validation_metric(g, subset(pool, fold), trained, spec));
    }

    double sum = 0.0, sum_sq = 0.0;
    int finite = 0;
    for (const double v : point.fold_metrics) {
      if (std::isfinite(v)) {
        sum += v;
        sum_sq += v * v;
        ++finite;
      }
    }
    if (finite == 0) throw std::runtime_error("cross_validate: no valid fold metric");
    point.mean_metric = sum / finite;
    point.stddev_metric =
        finite > 1 ? std::sqrt(std::max(0.0, sum_sq / finite - point.mean_metric * point.mean_metric))
                   : 0.0;
    result.grid.push_back(std::move(point));
  }

  result.winner_index = 0;
  for (int i = 1; i < static_cast<int>(result.grid.size()); ++i) {
    const double best = result.grid[result.winner_index].mean_metric;
    const double candidate = result.grid[i].mean_metric;
    if (maximize ? candidate > best : candidate < best) result.winner_index = i;
  }

  const TrainSpec& winner = result.grid[result.winner_index].spec;
  const TrainResult final_model = train(g, pool, winner);
  result.winner_cell = final_model.cell;
  result.winner_head = final_model.head;

  if (heldout_count > 0) {
    const LabeledSet heldout = subset(labeled, result.heldout_rows);
    result.heldout_report = evaluate(g, heldout, final_model.cell, final_model.head, winner);
    result.heldout_metric = winner.task == Task::Classification
                                ? result.heldout_report.auc_pr
                                : result.heldout_report.cutoffs.back().mae;
  }
  return result;
}

void write_trace_csv(const std::string& path, const std::vector<IterationRecord>& trace) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write trace: " + path);
  file << "iteration,f,grad_norm_inf,alpha,line_search_evals\n";
  file.precision(17);
  for (const auto& rec : trace) {
    file << rec.iteration << "," << rec.f << "," << rec.grad_norm << "," << rec.alpha << ","
         << rec.ls_evals << "\n";
  }
}

}  // namespace grnn

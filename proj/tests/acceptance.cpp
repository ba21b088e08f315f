// Acceptance suite: one self-contained check per release criterion, each
// printed as a single [PASS]/[FAIL] line. The process exits with the number
// of failed criteria.
#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "grnn/checkpoint.hpp"
#include "grnn/classic.hpp"
#include "grnn/gradcheck.hpp"
#include "grnn/harness.hpp"
#include "oracles.hpp"

using namespace grnn;

namespace {

struct Criterion {
  int id;
  std::string name;
  bool passed;
  std::string detail;
  double seconds;
};

std::vector<Criterion> g_results;

void run_criterion(int id, const std::string& name,
                   const std::function<bool(std::string&)>& body) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool passed = false;
  try {
    passed = body(detail);
  } catch (const std::exception& error) {
    detail = std::string("exception: ") + error.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  g_results.push_back({id, name, passed, detail, seconds});
  std::printf("[%s] criterion %2d: %s (%s) [%.1fs]\n", passed ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str(), seconds);
  std::fflush(stdout);
}

// The ten pinned oracle-comparison graphs (|V| <= 50, all with edges and
// well-separated dominant singular values, verified while freezing).
std::vector<Graph> oracle_graphs() {
  const std::vector<std::tuple<int, double, std::uint64_t>> specs = {
      {20, 0.10, 101}, {25, 0.12, 102}, {30, 0.08, 103}, {35, 0.10, 104}, {40, 0.07, 105},
      {45, 0.06, 106}, {50, 0.05, 107}, {22, 0.15, 108}, {33, 0.09, 109}, {50, 0.08, 110}};
  std::vector<Graph> graphs;
  for (const auto& [n, p, seed] : specs) graphs.push_back(generate_synthetic(ErdosRenyi{n, p}, seed));
  return graphs;
}

struct EndToEndArtifacts {
  std::vector<std::uint8_t> checkpoint;
  std::string report_json;
};

// Shared 90/10 ranking pipeline for criteria 4, 5, and 10: ER(200, 0.03),
// oracle targets, train on 90%, heldout MAE(all) vs the constant-mean
// baseline built from the training targets.
bool ranking_pipeline(Task task, CellKind cell, EndToEndArtifacts* artifacts, double& ratio_out) {
  const Graph g = generate_synthetic(ErdosRenyi{200, 0.03}, 42);
  const LabeledSet all = make_targets(g, task);

  Rng rng = Rng(42).stream("split");
  std::vector<int> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const int heldout_count = all.size() / 10;
  const LabeledSet heldout = subset(all, {order.begin(), order.begin() + heldout_count});
  const LabeledSet train_set = subset(all, {order.begin() + heldout_count, order.end()});

  TrainSpec spec;
  spec.task = task;
  spec.cell = cell;
  spec.d = 5;
  spec.K = 6;
  spec.seed = 42;
  spec.deterministic = true;
  spec.optimizer.f_tol = 1e-12;
  spec.optimizer.g_tol = 1e-9;
  const TrainResult result = train(g, train_set, spec);
  const EvalReport report = evaluate(g, heldout, result.cell, result.head, spec);
  const double model_mae = report.cutoffs.back().mae;

  auto combined = [&](const Eigen::MatrixXd& labels, int r) {
    return labels.cols() > 1 ? labels(r, 0) + labels(r, 1) : labels(r, 0);
  };
  double mean = 0.0;
  for (int r = 0; r < train_set.size(); ++r) mean += combined(train_set.labels, r);
  mean /= train_set.size();
  double baseline_mae = 0.0;
  for (int r = 0; r < heldout.size(); ++r) {
    baseline_mae += std::abs(combined(heldout.labels, r) - mean);
  }
  baseline_mae /= heldout.size();

  if (artifacts) {
    artifacts->checkpoint = checkpoint_bytes({task, spec.K, result.cell, result.head});
    artifacts->report_json = report.to_json();
  }
  ratio_out = model_mae / baseline_mae;
  return model_mae <= 0.5 * baseline_mae;
}

// Classification pipeline for criteria 6 and 10: planted partition,
// structure-only features, CV over K in {2, 6} at d = 5.
bool classification_pipeline(EndToEndArtifacts* artifacts, double& auc_out, int& winner_k_out) {
  const Graph attributed = generate_synthetic(PlantedPartition{200, 2, 0.08, 0.01}, 42);
  const LabeledSet labels = make_targets(attributed, Task::Classification);
  const Graph g = drop_vertex_attrs(attributed);  // no attribute leak of the block id

  std::vector<TrainSpec> grid;
  for (const int K : {2, 6}) {
    TrainSpec spec;
    spec.task = Task::Classification;
    spec.cell = CellKind::Sigmoid;
    spec.d = 5;
    spec.K = K;
    spec.seed = 42;
    spec.l2_coeff = 1e-4;
    spec.deterministic = true;
    spec.optimizer.f_tol = 1e-10;
    spec.optimizer.g_tol = 1e-8;
    grid.push_back(spec);
  }
  const CvResult result = cross_validate(g, labels, grid, 10, 42, 0.1);
  const TrainSpec& winner = result.grid[result.winner_index].spec;
  if (artifacts) {
    artifacts->checkpoint =
        checkpoint_bytes({Task::Classification, winner.K, result.winner_cell, result.winner_head});
    artifacts->report_json = result.heldout_report.to_json();
  }
  auc_out = result.heldout_metric;
  winner_k_out = winner.K;
  return result.heldout_metric >= 0.85;
}

EndToEndArtifacts g_pagerank_run, g_hits_run, g_classification_run;

// OS noise only ever adds wall time, so the minimum over repeats (after a
// warm-up pass) is the robust estimator of the true cost.
double min_of_repeats(const std::function<double()>& timed, int repeats = 5) {
  timed();  // warm-up: allocator, page faults, frequency ramp
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < repeats; ++i) best = std::min(best, timed());
  return best;
}

}  // namespace

int main() {
  // 1. Gradient correctness over the randomized configuration sweep.
  run_criterion(1, "gradient check vs central finite differences", [](std::string& detail) {
    const GradCheckReport report = run_gradcheck(1234);
    std::ostringstream os;
    os << report.rows.size() << " configs, max rel err " << report.max_rel_error << ", "
       << report.seconds << "s";
    detail = os.str();
    return report.passed(1e-5) && report.seconds < 60.0;
  });

  // 2. PageRank against the dense power-iteration oracle.
  run_criterion(2, "pagerank oracle equivalence and per-iteration mass", [](std::string& detail) {
    double worst_err = 0.0, worst_sum = 0.0;
    for (const Graph& g : oracle_graphs()) {
      const Eigen::VectorXd oracle = oracles::dense_pagerank(g, 0.85, 100);
      const PageRankScores scores = pagerank(g, {0.85, 100, 0.0});
      worst_err = std::max(worst_err, (scores.scores - oracle).lpNorm<Eigen::Infinity>());
      for (int iterations = 1; iterations <= 100; ++iterations) {
        const PageRankScores partial = pagerank(g, {0.85, iterations, 0.0});
        worst_sum = std::max(worst_sum, std::abs(partial.scores.sum() - 1.0));
      }
    }
    std::ostringstream os;
    os << "10 graphs, max |err| " << worst_err << ", max |sum-1| " << worst_sum;
    detail = os.str();
    return worst_err < 1e-10 && worst_sum < 1e-12;
  });

  // 3. HITS against dense dominant singular vectors.
  run_criterion(3, "hits oracle equivalence at 1000 iterations", [](std::string& detail) {
    double worst_err = 0.0, worst_norm = 0.0;
    for (const Graph& g : oracle_graphs()) {
      const HitsScores scores = hits(g, 1000);
      const oracles::HitsOracle oracle = oracles::dense_hits(g);
      worst_err = std::max(worst_err, (scores.hub - oracle.hub).lpNorm<Eigen::Infinity>());
      worst_err =
          std::max(worst_err, (scores.authority - oracle.authority).lpNorm<Eigen::Infinity>());
      worst_norm = std::max(worst_norm, std::abs(scores.hub.norm() - 1.0));
      worst_norm = std::max(worst_norm, std::abs(scores.authority.norm() - 1.0));
    }
    std::ostringstream os;
    os << "10 graphs, max |err| " << worst_err << ", max norm defect " << worst_norm;
    detail = os.str();
    return worst_err < 1e-6 && worst_norm < 1e-9;
  });

  // 4. Learn PageRank end to end, both cells.
  run_criterion(4, "learned pagerank beats half the constant baseline", [](std::string& detail) {
    double ratio_s = 0.0, ratio_g = 0.0;
    const bool ok_s = ranking_pipeline(Task::PagerankRegression, CellKind::Sigmoid,
                                       &g_pagerank_run, ratio_s);
    const bool ok_g = ranking_pipeline(Task::PagerankRegression, CellKind::Gru, nullptr, ratio_g);
    std::ostringstream os;
    os << "heldout MAE / baseline: sigmoid " << ratio_s << ", gru " << ratio_g << " (bound 0.5)";
    detail = os.str();
    return ok_s && ok_g;
  });

  // 5. Learn HITS end to end, both cells, combined-score evaluation.
  run_criterion(5, "learned hits beats half the constant baseline", [](std::string& detail) {
    double ratio_s = 0.0, ratio_g = 0.0;
    const bool ok_s =
        ranking_pipeline(Task::HitsRegression, CellKind::Sigmoid, &g_hits_run, ratio_s);
    const bool ok_g = ranking_pipeline(Task::HitsRegression, CellKind::Gru, nullptr, ratio_g);
    std::ostringstream os;
    os << "heldout MAE / baseline: sigmoid " << ratio_s << ", gru " << ratio_g << " (bound 0.5)";
    detail = os.str();
    return ok_s && ok_g;
  });

  // 6. Vertex classification with cross-validated depth.
  run_criterion(6, "planted-partition classification via 10-fold cv", [](std::string& detail) {
    double auc = 0.0;
    int winner_k = 0;
    const bool ok = classification_pipeline(&g_classification_run, auc, winner_k);
    std::ostringstream os;
    os << "winner K=" << winner_k << ", heldout AUC-PR " << auc << " (bound 0.85)";
    detail = os.str();
    return ok;
  });

  // 7. Optimizer behavior on the reference problems.
  run_criterion(7, "bfgs on rosenbrock and an SPD quadratic", [](std::string& detail) {
    OptimizerConfig cfg;
    cfg.g_tol = 1e-9;
    cfg.f_tol = 1e-16;

    const Objective rosenbrock = [](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
      const double a = x[0], b = x[1];
      grad.resize(2);
      grad[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
      grad[1] = 200.0 * (b - a * a);
      return (1.0 - a) * (1.0 - a) + 100.0 * (b - a * a) * (b - a * a);
    };
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    const MinimizeResult rb = minimize(rosenbrock, x0, cfg);
    Eigen::VectorXd minimum(2);
    minimum << 1.0, 1.0;
    bool ok = (rb.x - minimum).norm() < 1e-6 && rb.trace.size() <= 100;

    double prev = std::numeric_limits<double>::infinity();
    for (const auto& rec : rb.trace) {
      ok = ok && rec.f_alpha <= rec.phi0 + cfg.wolfe_c1 * rec.alpha * rec.dphi0;
      ok = ok && std::abs(rec.dphi_alpha) <= -cfg.wolfe_c2 * rec.dphi0;
      ok = ok && rec.f <= prev;
      prev = rec.f;
    }

    Rng rng(61);
    Eigen::MatrixXd m(5, 5);
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c) m(r, c) = rng.uniform(-1.0, 1.0);
    const Eigen::MatrixXd A = m * m.transpose() + 0.5 * Eigen::MatrixXd::Identity(5, 5);
    Eigen::VectorXd rhs(5);
    for (int i = 0; i < 5; ++i) rhs[i] = rng.uniform(-2.0, 2.0);
    const Objective quadratic = [&A, &rhs](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
      grad = A * x - rhs;
      return 0.5 * x.dot(A * x) - rhs.dot(x);
    };
    const MinimizeResult quad = minimize(quadratic, Eigen::VectorXd::Zero(5), cfg);
    const Eigen::VectorXd solution = A.ldlt().solve(rhs);
    const bool quad_ok =
        (quad.x - solution).lpNorm<Eigen::Infinity>() < 1e-6 && quad.trace.size() <= 25;

    std::ostringstream os;
    os << "rosenbrock " << rb.trace.size() << " iters, quadratic " << quad.trace.size()
       << " iters";
    detail = os.str();
    return ok && quad_ok;
  });

  // 8. Structural properties: equivariance, locality, refinement.
  run_criterion(8, "equivariance, K-hop locality, wl refinement", [](std::string& detail) {
    bool ok = true;

    // Permutation equivariance of apply, bit-exact in deterministic mode.
    const Graph g = generate_synthetic(ErdosRenyi{30, 0.12}, 77);
    Rng rng(78);
    for (const CellKind kind : {CellKind::Sigmoid, CellKind::Gru}) {
      TrainSpec spec;
      spec.task = Task::PagerankRegression;
      spec.cell = kind;
      spec.d = 4;
      spec.K = 5;
      const ParamPack pack = init_params(spec, 0, rng.next());
      std::vector<int> perm(g.num_vertices());
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(perm);
      const Eigen::MatrixXd base = apply(g, pack.cell, pack.head, spec.K, {true});
      const Eigen::MatrixXd relabeled =
          apply(permute_vertices(g, perm), pack.cell, pack.head, spec.K, {true});
      for (int v = 0; v < g.num_vertices(); ++v) ok = ok && base(v, 0) == relabeled(perm[v], 0);
    }

    // K-hop locality on a bidirected path, bit-identical beyond distance K.
    for (const int K : {1, 2, 6, 10}) {
      const int n = 14;
      Eigen::MatrixXd attrs = Eigen::MatrixXd::Constant(n, 1, 0.4);
      std::vector<std::pair<int, int>> edges;
      for (int i = 0; i + 1 < n; ++i) {
        edges.emplace_back(i, i + 1);
        edges.emplace_back(i + 1, i);
      }
      const Graph base = Graph::from_edges(n, edges, attrs);
      attrs(0, 0) = -2.0;
      const Graph modified = Graph::from_edges(n, edges, attrs);

      TrainSpec spec;
      spec.cell = CellKind::Sigmoid;
      spec.d = 3;
      spec.K = K;
      const ParamPack pack = init_params(spec, 1, 900 + K);
      const auto [state_a, tape_a] = forward(base, pack.cell, K);
      const auto [state_b, tape_b] = forward(modified, pack.cell, K);
      for (int v = 0; v < n; ++v) {
        const bool identical = state_a.final().row(v) == state_b.final().row(v);
        ok = ok && (v > K ? identical : !identical);
      }
    }

    // WL fixtures and monotone refinement.
    const WLState c4 = weisfeiler_lehman(oracles::bidirected_cycle(4), 20);
    ok = ok && c4.num_classes == 1;
    const WLState p3 = weisfeiler_lehman(oracles::bidirected_path(3), 20);
    ok = ok && p3.num_classes == 2 && p3.labels[0] == p3.labels[2] && p3.labels[0] != p3.labels[1];
    const Graph wl_graph = generate_synthetic(ErdosRenyi{24, 0.1}, 5);
    std::vector<int> prev_labels;
    int prev_classes = 0;
    for (int rounds = 1; rounds <= 6; ++rounds) {
      const WLState state = weisfeiler_lehman(wl_graph, rounds);
      ok = ok && state.num_classes >= prev_classes;
      if (!prev_labels.empty()) {
        for (int a = 0; a < wl_graph.num_vertices(); ++a)
          for (int b = a + 1; b < wl_graph.num_vertices(); ++b)
            if (prev_labels[a] != prev_labels[b]) ok = ok && state.labels[a] != state.labels[b];
      }
      prev_labels = state.labels;
      prev_classes = state.num_classes;
    }

    detail = "apply equivariance (bit-exact), locality K in {1,2,6,10}, wl fixtures";
    return ok;
  });

  // 9. Linear cost in |E| and in K. |V| stays small relative to the edge
  // counts so the per-vertex constant does not drown the per-edge signal.
  run_criterion(9, "forward+backward cost scales linearly", [](std::string& detail) {
    const int n = 500;
    const int d = 5;
    TrainSpec spec;
    spec.cell = CellKind::Sigmoid;
    spec.d = d;

    auto time_pass = [&](const Graph& g, int K) {
      const ParamPack pack = init_params(spec, 0, 404);
      Eigen::MatrixXd grad_final(n, d);
      Rng rng(405);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c) grad_final(r, c) = rng.uniform(-1.0, 1.0);
      return min_of_repeats([&] {
        const auto start = std::chrono::steady_clock::now();
        const auto [state, tape] = forward(g, pack.cell, K);
        const CellParams grads = backward(tape, grad_final);
        (void)grads;
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      });
    };

    std::vector<double> edge_counts, times;
    for (const double target_edges : {1e3, 3e3, 1e4, 3e4, 1e5}) {
      const double p = target_edges / (static_cast<double>(n) * (n - 1));
      const Graph g = generate_synthetic(ErdosRenyi{n, p}, 500 + static_cast<int>(target_edges));
      edge_counts.push_back(static_cast<double>(g.num_edges()));
      times.push_back(time_pass(g, 6));
    }

    // Least-squares line t = a + b|E|; R^2 against the mean model.
    const int m = static_cast<int>(times.size());
    double mean_e = 0.0, mean_t = 0.0;
    for (int i = 0; i < m; ++i) {
      mean_e += edge_counts[i];
      mean_t += times[i];
    }
    mean_e /= m;
    mean_t /= m;
    double cov = 0.0, var_e = 0.0, ss_tot = 0.0;
    for (int i = 0; i < m; ++i) {
      cov += (edge_counts[i] - mean_e) * (times[i] - mean_t);
      var_e += (edge_counts[i] - mean_e) * (edge_counts[i] - mean_e);
      ss_tot += (times[i] - mean_t) * (times[i] - mean_t);
    }
    const double slope = cov / var_e;
    const double intercept = mean_t - slope * mean_e;
    double ss_res = 0.0;
    for (int i = 0; i < m; ++i) {
      const double fit = intercept + slope * edge_counts[i];
      ss_res += (times[i] - fit) * (times[i] - fit);
    }
    const double r_squared = 1.0 - ss_res / ss_tot;

    // Doubling K at the mid-size graph.
    const Graph mid = generate_synthetic(ErdosRenyi{n, 1e4 / (static_cast<double>(n) * (n - 1))},
                                         510);
    const double t6 = time_pass(mid, 6);
    const double t12 = time_pass(mid, 12);
    const double k_ratio = t12 / t6;

    std::ostringstream os;
    os << "R^2 " << r_squared << " over |E| ";
    for (std::size_t i = 0; i < edge_counts.size(); ++i) {
      os << (i ? "/" : "") << static_cast<long long>(edge_counts[i]);
    }
    os << " (ms ";
    for (std::size_t i = 0; i < times.size(); ++i) {
      os << (i ? "/" : "") << static_cast<long long>(1e3 * times[i] + 0.5);
    }
    os << "), K12/K6 " << k_ratio;
    detail = os.str();
    return r_squared > 0.95 && k_ratio < 2.3;
  });

  // 10. Bit-identical reruns of the end-to-end pipelines.
  run_criterion(10, "end-to-end determinism of criteria 4-6", [](std::string& detail) {
    if (g_pagerank_run.checkpoint.empty() || g_hits_run.checkpoint.empty() ||
        g_classification_run.checkpoint.empty()) {
      detail = "prerequisite runs missing";
      return false;
    }
    double ratio = 0.0;
    EndToEndArtifacts pagerank_again, hits_again, classification_again;
    ranking_pipeline(Task::PagerankRegression, CellKind::Sigmoid, &pagerank_again, ratio);
    ranking_pipeline(Task::HitsRegression, CellKind::Sigmoid, &hits_again, ratio);
    double auc = 0.0;
    int winner_k = 0;
    classification_pipeline(&classification_again, auc, winner_k);

    const bool ok = pagerank_again.checkpoint == g_pagerank_run.checkpoint &&
                    pagerank_again.report_json == g_pagerank_run.report_json &&
                    hits_again.checkpoint == g_hits_run.checkpoint &&
                    hits_again.report_json == g_hits_run.report_json &&
                    classification_again.checkpoint == g_classification_run.checkpoint &&
                    classification_again.report_json == g_classification_run.report_json;
    detail = ok ? "checkpoints and reports byte-identical" : "byte mismatch between reruns";
    return ok;
  });

  int failures = 0;
  for (const auto& result : g_results) failures += !result.passed;
  std::printf("%d/%zu criteria passed\n", static_cast<int>(g_results.size()) - failures,
              g_results.size());
  return failures;
}

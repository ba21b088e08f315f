#include "grnn/gradcheck.hpp"

#include <chrono>
#include <cmath>

#include "grnn/harness.hpp"

namespace grnn {

namespace {

// Per-coordinate relative error against the finite-difference estimate.
// Differences below the central-difference noise floor count as zero; the
// denominator never drops below 1% of the gradient's overall scale, so a
// tiny coordinate cannot spuriously dominate.
double max_relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& fd) {
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

}  // namespace

GradCheckReport run_gradcheck(std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  GradCheckReport report;

  Rng rng = Rng(seed).stream("gradcheck");
  int config_index = 0;

  for (const int d : {1, 3, 5}) {
    for (const int K : {1, 2, 4}) {
      for (const CellKind cell : {CellKind::Sigmoid, CellKind::Gru}) {
        for (const Task task :
             {Task::PagerankRegression, Task::HitsRegression, Task::Classification}) {
          ++config_index;
          Rng local = rng.stream("config-" + std::to_string(config_index));

          // 20 vertices, edge probability tuned for ~60 directed edges.
          const Graph g =
              generate_synthetic(ErdosRenyi{20, 60.0 / (20.0 * 19.0)}, local.next());

          TrainSpec spec;
          spec.task = task;
          spec.cell = cell;
          spec.d = d;
          spec.K = K;
          spec.l2_coeff = (config_index % 2 == 0) ? 0.01 : 0.0;
          spec.seed = local.next();

          // Random labeled subset, about half the graph.
          LabeledSet labeled;
          for (int v = 0; v < g.num_vertices(); ++v) {
            if (local.uniform() < 0.5) labeled.vertex_ids.push_back(v);
          }
          if (labeled.vertex_ids.empty()) labeled.vertex_ids.push_back(0);
          labeled.labels.resize(labeled.size(), task_output_arity(task));
          for (int r = 0; r < labeled.size(); ++r) {
            for (int c = 0; c < labeled.arity(); ++c) {
              labeled.labels(r, c) = task == Task::Classification
                                         ? static_cast<double>(local.next() & 1)
                                         : local.uniform();
            }
          }

          const ParamPack shapes = init_params(spec, g.vertex_attr_dim(), spec.seed);
          const Objective objective = make_objective(g, labeled, spec, shapes);

          Eigen::VectorXd x(shapes.total_params());
          for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = local.uniform(-0.5, 0.5);

          Eigen::VectorXd analytic(x.size());
          objective(x, analytic);

          const double h = 1e-6;
          Eigen::VectorXd fd(x.size());
          Eigen::VectorXd unused(x.size());
          for (Eigen::Index i = 0; i < x.size(); ++i) {
            Eigen::VectorXd xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            fd[i] = (objective(xp, unused) - objective(xm, unused)) / (2.0 * h);
          }

          GradCheckRow row;
          row.config = "d=" + std::to_string(d) + " K=" + std::to_string(K) +
                       " cell=" + (cell == CellKind::Sigmoid ? "sigmoid" : "gru") +
                       " task=" + to_string(task) +
                       " l2=" + std::to_string(spec.l2_coeff);
          row.num_params = static_cast<int>(x.size());
          row.max_rel_error = max_relative_error(analytic, fd);
          report.max_rel_error = std::max(report.max_rel_error, row.max_rel_error);
          report.rows.push_back(std::move(row));
        }
      }
    }
  }

  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace grnn

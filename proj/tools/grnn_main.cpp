// Command-line front end: classic-algorithm score dumps, synthetic graph
// generation, target generation, training, cross-validation, applying and
// evaluating trained models, and the gradient-check suite.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "grnn/checkpoint.hpp"
#include "grnn/classic.hpp"
#include "grnn/gradcheck.hpp"
#include "grnn/graph.hpp"
#include "grnn/harness.hpp"

namespace {

using namespace grnn;

struct GraphArgs {
  std::string path;
  std::string synth;
  bool bidirected = false;
  bool remap_ids = false;
  int num_vertices_override = -1;
  std::uint64_t seed = 0;
};

void add_graph_options(CLI::App* cmd, GraphArgs& args) {
  auto* file = cmd->add_option("--graph", args.path, "edge-list file (src dst [attr...])");
  auto* synth = cmd->add_option(
      "--synth", args.synth, "synthetic spec: er:n:p | ba:n:m | pp:n:blocks:p_in:p_out");
  file->excludes(synth);
  synth->excludes(file);
  cmd->add_flag("--bidirected", args.bidirected, "emit both directions for every file edge");
  cmd->add_flag("--remap-ids", args.remap_ids, "dictionary-compress sparse external vertex ids");
  cmd->add_option("--num-vertices", args.num_vertices_override,
                  "vertex-count override for edge-list files");
}

SyntheticModel parse_synth(const std::string& spec) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t colon = spec.find(':', start);
    parts.push_back(spec.substr(start, colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  auto want = [&](std::size_t n) {
    if (parts.size() != n + 1) {
      throw CLI::ValidationError("--synth", "expected " + std::to_string(n) +
                                                " parameters after the model name");
    }
  };
  if (parts[0] == "er") {
    want(2);
    return ErdosRenyi{std::stoi(parts[1]), std::stod(parts[2])};
  }
  if (parts[0] == "ba") {
    want(2);
    return BarabasiAlbert{std::stoi(parts[1]), std::stoi(parts[2])};
  }
  if (parts[0] == "pp") {
    want(4);
    return PlantedPartition{std::stoi(parts[1]), std::stoi(parts[2]), std::stod(parts[3]),
                            std::stod(parts[4])};
  }
  throw CLI::ValidationError("--synth", "unknown model '" + parts[0] + "'");
}

Graph load_graph(const GraphArgs& args) {
  if (!args.synth.empty()) return generate_synthetic(parse_synth(args.synth), args.seed);
  if (args.path.empty()) {
    throw CLI::ValidationError("--graph", "either --graph or --synth is required");
  }
  EdgeListOptions options;
  options.bidirected = args.bidirected;
  options.remap_ids = args.remap_ids;
  if (args.num_vertices_override >= 0) options.num_vertices = args.num_vertices_override;
  Graph g = load_edge_list(args.path, options);
  if (g.duplicates_collapsed() > 0) {
    std::cerr << "warning: collapsed " << g.duplicates_collapsed()
              << " duplicate directed edge(s)\n";
  }
  return g;
}

void dump_scores(const std::string& path, const Eigen::MatrixXd& columns) {
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!path.empty()) {
    file.open(path);
    if (!file) throw std::runtime_error("cannot write: " + path);
    out = &file;
  }
  out->precision(17);
  for (Eigen::Index v = 0; v < columns.rows(); ++v) {
    (*out) << v;
    for (Eigen::Index c = 0; c < columns.cols(); ++c) (*out) << " " << columns(v, c);
    (*out) << "\n";
  }
}

struct TrainArgs {
  GraphArgs graph;
  std::string labels_path;
  bool auto_targets = false;
  bool keep_attrs = false;
  std::string task = "pagerank-regression";
  std::string cell = "sigmoid";
  int d = 5;
  int K = 6;
  double l2 = 0.0;
  std::uint64_t seed = 0;
  bool deterministic = false;
  OptimizerConfig optimizer;
  std::string out_dir;
};

void add_train_options(CLI::App* cmd, TrainArgs& args) {
  add_graph_options(cmd, args.graph);
  cmd->add_option("--labels", args.labels_path, "label file (vertex_id value [value...])");
  cmd->add_flag("--auto-targets", args.auto_targets,
                "generate labels from the task oracle instead of a file");
  cmd->add_flag("--keep-attrs", args.keep_attrs,
                "keep vertex attributes as model inputs even with classification auto-targets");
  cmd->add_option("--task", args.task, "pagerank-regression | hits-regression | classification");
  cmd->add_option("--cell", args.cell, "sigmoid | gru");
  cmd->add_option("--d", args.d, "feature dimension");
  cmd->add_option("--K", args.K, "unroll depth");
  cmd->add_option("--l2", args.l2, "L2 weight-decay coefficient");
  cmd->add_option("--seed", args.seed, "top-level random seed");
  cmd->add_flag("--deterministic", args.deterministic,
                "canonical aggregation order (relabeling-exact results)");
  cmd->add_option("--max-iterations", args.optimizer.max_iterations);
  cmd->add_option("--f-tol", args.optimizer.f_tol, "objective-change stop");
  cmd->add_option("--g-tol", args.optimizer.g_tol, "gradient max-norm stop");
}

TrainSpec make_spec(const TrainArgs& args) {
  TrainSpec spec;
  spec.task = task_from_string(args.task);
  if (args.cell == "sigmoid") {
    spec.cell = CellKind::Sigmoid;
  } else if (args.cell == "gru") {
    spec.cell = CellKind::Gru;
  } else {
    throw CLI::ValidationError("--cell", "expected sigmoid or gru");
  }
  spec.d = args.d;
  spec.K = args.K;
  spec.l2_coeff = args.l2;
  spec.seed = args.seed;
  spec.deterministic = args.deterministic;
  spec.optimizer = args.optimizer;
  spec.graph_source = !args.graph.synth.empty() ? args.graph.synth : args.graph.path;
  spec.label_source = args.auto_targets ? "oracle" : args.labels_path;
  return spec;
}

// Resolves the (graph, labels) pair: explicit label file, or oracle-generated
// targets. Classification auto-targets consume the block attribute as labels
// and strip it from the model's input unless --keep-attrs.
std::pair<Graph, LabeledSet> load_dataset(const TrainArgs& args, const TrainSpec& spec) {
  Graph g = load_graph(args.graph);
  LabeledSet labeled;
  if (args.auto_targets) {
    labeled = make_targets(g, spec.task);
    if (spec.task == Task::Classification && !args.keep_attrs) g = drop_vertex_attrs(g);
  } else {
    if (args.labels_path.empty()) {
      throw CLI::ValidationError("--labels", "either --labels or --auto-targets is required");
    }
    labeled = load_labels(args.labels_path);
  }
  return {std::move(g), std::move(labeled)};
}

std::filesystem::path ensure_out_dir(const std::string& dir) {
  const std::filesystem::path path = dir.empty() ? "." : dir;
  std::filesystem::create_directories(path);
  return path;
}

int run_classic(const std::string& which, const GraphArgs& graph_args, double damping,
                int iterations, double tolerance, int max_rounds, const std::string& out) {
  const Graph g = load_graph(graph_args);
  if (which == "pagerank") {
    const PageRankScores scores = pagerank(g, {damping, iterations, tolerance});
    dump_scores(out, scores.scores);
  } else if (which == "hits") {
    const HitsScores scores = hits(g, iterations);
    Eigen::MatrixXd columns(g.num_vertices(), 2);
    columns.col(0) = scores.hub;
    columns.col(1) = scores.authority;
    dump_scores(out, columns);
  } else {
    const WLState state = weisfeiler_lehman(g, max_rounds);
    Eigen::MatrixXd columns(g.num_vertices(), 1);
    for (int v = 0; v < g.num_vertices(); ++v) columns(v, 0) = state.labels[v];
    dump_scores(out, columns);
    std::cerr << "rounds: " << state.rounds << ", classes: " << state.num_classes << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recurrent vertex-update learning on directed graphs"};
  app.require_subcommand(1);

  // ---- classic algorithm dumps ----
  GraphArgs classic_graph;
  double damping = 0.85;
  int iterations = 1000;
  double tolerance = 0.0;
  int max_rounds = 100;
  std::string classic_out;
  for (const std::string name : {"pagerank", "hits", "wl"}) {
    auto* cmd = app.add_subcommand(name, name == "pagerank" ? "PageRank score dump"
                                         : name == "hits"   ? "HITS hub/authority dump"
                                                            : "Color-refinement label dump");
    add_graph_options(cmd, classic_graph);
    cmd->add_option("--seed", classic_graph.seed, "seed for --synth graphs");
    if (name == "pagerank") {
      cmd->add_option("--damping", damping);
      cmd->add_option("--tolerance", tolerance, "L1 early-stop; 0 disables");
    }
    if (name != "wl") cmd->add_option("--iterations", iterations);
    if (name == "wl") cmd->add_option("--max-rounds", max_rounds);
    cmd->add_option("--out", classic_out, "output file (default stdout)");
  }

  // ---- synth ----
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic graph");
  std::string synth_spec, synth_out, synth_labels_out;
  std::uint64_t synth_seed = 0;
  synth_cmd->add_option("--model", synth_spec, "er:n:p | ba:n:m | pp:n:blocks:p_in:p_out")
      ->required();
  synth_cmd->add_option("--seed", synth_seed);
  synth_cmd->add_option("--out", synth_out, "edge-list output")->required();
  synth_cmd->add_option("--labels-out", synth_labels_out,
                        "write ground-truth block labels (planted partition)");

  // ---- make-targets ----
  auto* targets_cmd = app.add_subcommand("make-targets", "Oracle-generated training labels");
  GraphArgs targets_graph;
  std::string targets_task = "pagerank-regression", targets_out;
  add_graph_options(targets_cmd, targets_graph);
  targets_cmd->add_option("--seed", targets_graph.seed, "seed for --synth graphs");
  targets_cmd->add_option("--task", targets_task);
  targets_cmd->add_option("--out", targets_out, "label file output (default stdout)");

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "Fit cell and head parameters");
  TrainArgs train_args;
  add_train_options(train_cmd, train_args);
  train_cmd->add_option("--out", train_args.out_dir, "output directory (checkpoint, trace)");

  // ---- cv ----
  auto* cv_cmd = app.add_subcommand("cv", "Grid search with k-fold cross-validation");
  TrainArgs cv_args;
  std::vector<int> grid_d{1, 5, 10};
  std::vector<int> grid_k{1, 2, 6, 10};
  int folds = 10;
  double heldout_fraction = 0.1;
  add_train_options(cv_cmd, cv_args);
  cv_cmd->add_option("--grid-d", grid_d, "feature dimensions to try")->delimiter(',');
  cv_cmd->add_option("--grid-K", grid_k, "unroll depths to try")->delimiter(',');
  cv_cmd->add_option("--folds", folds);
  cv_cmd->add_option("--heldout", heldout_fraction, "final evaluation fraction");
  cv_cmd->add_option("--out", cv_args.out_dir, "output directory");

  // ---- apply ----
  auto* apply_cmd = app.add_subcommand("apply", "Run a trained model on a graph");
  GraphArgs apply_graph;
  std::string apply_checkpoint, apply_out;
  bool apply_deterministic = false;
  add_graph_options(apply_cmd, apply_graph);
  apply_cmd->add_option("--seed", apply_graph.seed, "seed for --synth graphs");
  apply_cmd->add_option("--checkpoint", apply_checkpoint)->required();
  apply_cmd->add_flag("--deterministic", apply_deterministic);
  apply_cmd->add_option("--out", apply_out, "predictions file (default stdout)");

  // ---- eval ----
  auto* eval_cmd = app.add_subcommand("eval", "Score a trained model against labels");
  TrainArgs eval_args;
  std::string eval_checkpoint;
  add_train_options(eval_cmd, eval_args);
  eval_cmd->add_option("--checkpoint", eval_checkpoint)->required();
  eval_cmd->add_option("--out", eval_args.out_dir, "output directory (report.json)");

  // ---- gradcheck ----
  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  std::uint64_t gradcheck_seed = 1234;
  bool gradcheck_verbose = false;
  gradcheck_cmd->add_option("--seed", gradcheck_seed);
  gradcheck_cmd->add_flag("--verbose", gradcheck_verbose, "per-configuration rows");

  CLI11_PARSE(app, argc, argv);

  try {
    for (const std::string name : {"pagerank", "hits", "wl"}) {
      if (app.got_subcommand(name)) {
        return run_classic(name, classic_graph, damping, iterations, tolerance, max_rounds,
                           classic_out);
      }
    }

    if (app.got_subcommand(synth_cmd)) {
      const Graph g = generate_synthetic(parse_synth(synth_spec), synth_seed);
      save_edge_list(g, synth_out);
      std::cout << "vertices: " << g.num_vertices() << ", edges: " << g.num_edges() << "\n";
      if (!synth_labels_out.empty()) {
        if (!g.has_vertex_attrs()) {
          throw std::runtime_error("--labels-out: this model has no ground-truth labels");
        }
        const LabeledSet labels = make_targets(g, Task::Classification);
        save_labels(labels, synth_labels_out);
      }
      return 0;
    }

    if (app.got_subcommand(targets_cmd)) {
      const Graph g = load_graph(targets_graph);
      const LabeledSet labels = make_targets(g, task_from_string(targets_task));
      if (targets_out.empty()) {
        Eigen::MatrixXd columns = labels.labels;
        dump_scores("", columns);
      } else {
        save_labels(labels, targets_out);
      }
      return 0;
    }

    if (app.got_subcommand(train_cmd)) {
      const TrainSpec spec = make_spec(train_args);
      const auto [g, labeled] = load_dataset(train_args, spec);
      const TrainResult result = train(g, labeled, spec);
      const auto out_dir = ensure_out_dir(train_args.out_dir);
      save_checkpoint((out_dir / "checkpoint.bin").string(),
                      {spec.task, spec.K, result.cell, result.head});
      write_trace_csv((out_dir / "trace.csv").string(), result.trace);
      std::cout << "risk: " << result.initial_risk << " -> " << result.final_risk << " in "
                << result.trace.size() << " iterations (" << to_string(result.reason) << ")\n"
                << "checkpoint: " << (out_dir / "checkpoint.bin").string() << "\n";
      return 0;
    }

    if (app.got_subcommand(cv_cmd)) {
      const TrainSpec base = make_spec(cv_args);
      const auto [g, labeled] = load_dataset(cv_args, base);
      std::vector<TrainSpec> grid;
      for (const int d : grid_d) {
        for (const int K : grid_k) {
          TrainSpec spec = base;
          spec.d = d;
          spec.K = K;
          grid.push_back(spec);
        }
      }
      const CvResult result = cross_validate(g, labeled, grid, folds, base.seed, heldout_fraction);
      for (const auto& point : result.grid) {
        std::cout << "d=" << point.spec.d << " K=" << point.spec.K
                  << " mean=" << point.mean_metric << " stddev=" << point.stddev_metric << "\n";
      }
      const TrainSpec& winner = result.grid[result.winner_index].spec;
      std::cout << "winner: d=" << winner.d << " K=" << winner.K;
      if (!result.heldout_rows.empty()) {
        std::cout << ", held-out metric: " << result.heldout_metric;
      }
      std::cout << "\n";
      const auto out_dir = ensure_out_dir(cv_args.out_dir);
      save_checkpoint((out_dir / "checkpoint.bin").string(),
                      {winner.task, winner.K, result.winner_cell, result.winner_head});
      if (!result.heldout_rows.empty()) {
        std::ofstream report(out_dir / "report.json");
        report << result.heldout_report.to_json() << "\n";
        std::cout << result.heldout_report.to_table();
      }
      return 0;
    }

    if (app.got_subcommand(apply_cmd)) {
      const Graph g = load_graph(apply_graph);
      const Checkpoint ckpt = load_checkpoint(apply_checkpoint);
      const Eigen::MatrixXd predictions =
          apply(g, ckpt.cell, ckpt.head, ckpt.K, {apply_deterministic});
      dump_scores(apply_out, predictions);
      return 0;
    }

    if (app.got_subcommand(eval_cmd)) {
      const Checkpoint ckpt = load_checkpoint(eval_checkpoint);
      TrainSpec spec = make_spec(eval_args);
      spec.task = ckpt.task;
      spec.K = ckpt.K;
      spec.d = ckpt.cell.d;
      spec.cell = ckpt.cell.kind;
      const auto [g, labeled] = load_dataset(eval_args, spec);
      const EvalReport report = evaluate(g, labeled, ckpt.cell, ckpt.head, spec);
      std::cout << report.to_table() << report.to_json() << "\n";
      if (!eval_args.out_dir.empty()) {
        const auto out_dir = ensure_out_dir(eval_args.out_dir);
        std::ofstream file(out_dir / "report.json");
        file << report.to_json() << "\n";
      }
      return 0;
    }

    if (app.got_subcommand(gradcheck_cmd)) {
      const GradCheckReport report = run_gradcheck(gradcheck_seed);
      if (gradcheck_verbose) {
        for (const auto& row : report.rows) {
          std::printf("%-60s %3d params  %.3e\n", row.config.c_str(), row.num_params,
                      row.max_rel_error);
        }
      }
      std::printf("gradcheck: %zu configurations, max relative error %.3e (%.1fs)\n",
                  report.rows.size(), report.max_rel_error, report.seconds);
      if (!report.passed()) {
        std::cerr << "gradcheck FAILED (threshold 1e-5)\n";
        return 1;
      }
      return 0;
    }
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}

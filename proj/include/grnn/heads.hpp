#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace grnn {

enum class HeadKind { Regression, Classification };
enum class LossKind { SquaredL2, CrossEntropy };

/// Output function mapping a final vertex feature to task predictions.
/// Regression: one-hidden-layer MLP, hidden width 2d, sigmoid hidden
/// activation, linear (unbounded) output of arity t_out. Classification:
/// single sigmoid logit. Flat layout (row-major matrices):
///   regression:     W_hidden, b_hidden, W_out, b_out
///   classification: W_out, b_out
struct HeadParams {
  HeadKind kind = HeadKind::Regression;
  int d = 0;      // input feature dimension
  int t_out = 1;  // output arity (1 for classification)

  Eigen::MatrixXd W_hidden;  // 2d x d (regression)
  Eigen::VectorXd b_hidden;  // 2d (regression)
  Eigen::MatrixXd W_out;     // regression: t_out x 2d; classification: 1 x d
  Eigen::VectorXd b_out;     // t_out

  static HeadParams zeros(HeadKind kind, int d, int t_out);

  int num_params() const;
  void write_flat(std::span<double> out) const;
  void read_flat(std::span<const double> in);
  void append_weight_mask(std::vector<std::uint8_t>& mask) const;
  double squared_weight_norm() const;
};

struct HeadCache {
  Eigen::VectorXd phi;
  Eigen::VectorXd hidden;  // regression: sigmoid hidden activations
  Eigen::VectorXd out;     // forward output (classification: the probability)
};

Eigen::VectorXd head_forward(const HeadParams& head, const Eigen::VectorXd& phi,
                             HeadCache* cache = nullptr);

/// Reverse-mode partials of head_forward; grad_output lives in the output
/// space (for classification, in probability space). Parameter gradients
/// accumulate into grad_accum.
Eigen::VectorXd head_backward(const HeadParams& head, const HeadCache& cache,
                              const Eigen::VectorXd& grad_output, HeadParams& grad_accum);

/// Classification-only backward taking the gradient in logit space. The
/// cross-entropy/sigmoid composition reduces to grad_logit = p - y, which
/// stays exact where the probability-space chain underflows; training uses
/// this path.
Eigen::VectorXd head_backward_logit(const HeadParams& head, const HeadCache& cache,
                                    double grad_logit, HeadParams& grad_accum);

struct LossValueGrad {
  double value;
  Eigen::VectorXd grad;
};

/// Squared L2 loss: |pred - target|^2, gradient 2(pred - target).
LossValueGrad loss_sq(const Eigen::VectorXd& pred, const Eigen::VectorXd& target);

struct ScalarLossGrad {
  double value;
  double grad;
};

/// Binary cross-entropy of probability p against label y in {0,1}. p is
/// clamped to [1e-12, 1-1e-12] for the value; grad is d(value)/dp at the
/// clamped point.
ScalarLossGrad loss_ce(double p, double y);

/// d(cross-entropy)/d(logit) for a sigmoid output: p - y.
double ce_logit_grad(double p, double y);

struct RiskResult {
  double value;
  Eigen::MatrixXd grad_pred;  // |X| x t, d(value)/d(pred), 1/|X| scaling included
};

/// Mean loss over the labeled rows plus l2_coeff * weight_squared_norm
/// (weights only; the caller supplies the norm of all trainable weight
/// matrices and owns the matching gradient term).
RiskResult empirical_risk(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& labels,
                          LossKind loss, double l2_coeff, double weight_squared_norm);

struct RankCutoffReport {
  int requested;  // cutoff as asked
  int effective;  // clamped to the evaluation-set size
  double mae;
  double min_true_score;  // smallest true score among the ranked prefix
};

/// Evaluation record: per-cutoff MAE for ranking tasks, AUC-PR for
/// classification. Serializes to a single-line JSON object and a
/// human-readable table.
struct EvalReport {
  std::vector<RankCutoffReport> cutoffs;  // regression tasks
  double max_true_score = 0.0;            // largest true score in the eval set
  double auc_pr = -1.0;                   // classification tasks, -1 when unused
  std::map<std::string, std::string> metadata;

  std::string to_json() const;
  std::string to_table() const;
};

/// MAE over the `c` vertices with the highest TRUE score, for each cutoff c
/// (ties in true score broken by ascending position index). Oversize
/// cutoffs clamp to the set size; `requested`/`effective` record that.
EvalReport mae_at_ranks(const Eigen::VectorXd& pred_scalar, const Eigen::VectorXd& true_scalar,
                        const std::vector<int>& cutoffs);

/// Area under the precision-recall curve as average precision: descending
/// score sweep over distinct thresholds, step integration of precision over
/// recall. Tied scores form a single operating point. Throws when labels
/// are all one class.
double auc_pr(const Eigen::VectorXd& pred_prob, const Eigen::VectorXd& labels);

}  // namespace grnn

#include "grnn/heads.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace grnn {

namespace {

constexpr double kProbEps = 1e-12;

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
  return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

void write_matrix_row_major(const Eigen::MatrixXd& m, std::span<double>& out) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out.front() = m(r, c);
      out = out.subspan(1);
    }
}

void read_matrix_row_major(Eigen::MatrixXd& m, std::span<const double>& in) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = in.front();
      in = in.subspan(1);
    }
}

void write_vector(const Eigen::VectorXd& v, std::span<double>& out) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.front() = v[i];
    out = out.subspan(1);
  }
}

void read_vector(Eigen::VectorXd& v, std::span<const double>& in) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v[i] = in.front();
    in = in.subspan(1);
  }
}

}  // namespace

HeadParams HeadParams::zeros(HeadKind kind, int d, int t_out) {
  if (d < 1) throw std::invalid_argument("head: feature dimension must be >= 1");
  HeadParams head;
  head.kind = kind;
  head.d = d;
  if (kind == HeadKind::Regression) {
    if (t_out < 1) throw std::invalid_argument("head: output arity must be >= 1");
    head.t_out = t_out;
    head.W_hidden = Eigen::MatrixXd::Zero(2 * d, d);
    head.b_hidden = Eigen::VectorXd::Zero(2 * d);
    head.W_out = Eigen::MatrixXd::Zero(t_out, 2 * d);
    head.b_out = Eigen::VectorXd::Zero(t_out);
  } else {
    head.t_out = 1;
    head.W_out = Eigen::MatrixXd::Zero(1, d);
    head.b_out = Eigen::VectorXd::Zero(1);
  }
  return head;
}

int HeadParams::num_params() const {
  if (kind == HeadKind::Regression) return 2 * d * d + 2 * d + t_out * 2 * d + t_out;
  return d + 1;
}

void HeadParams::write_flat(std::span<double> out) const {
  if (static_cast<int>(out.size()) != num_params()) {
    throw std::invalid_argument("head write_flat: size mismatch");
  }
  if (kind == HeadKind::Regression) {
    write_matrix_row_major(W_hidden, out);
    write_vector(b_hidden, out);
  }
  write_matrix_row_major(W_out, out);
  write_vector(b_out, out);
}

void HeadParams::read_flat(std::span<const double> in) {
  if (static_cast<int>(in.size()) != num_params()) {
    throw std::invalid_argument("head read_flat: size mismatch");
  }
  if (kind == HeadKind::Regression) {
    read_matrix_row_major(W_hidden, in);
    read_vector(b_hidden, in);
  }
  read_matrix_row_major(W_out, in);
  read_vector(b_out, in);
}

void HeadParams::append_weight_mask(std::vector<std::uint8_t>& mask) const {
  if (kind == HeadKind::Regression) {
    mask.insert(mask.end(), 2 * d * d, 1);
    mask.insert(mask.end(), 2 * d, 0);
    mask.insert(mask.end(), t_out * 2 * d, 1);
    mask.insert(mask.end(), t_out, 0);
  } else {
    mask.insert(mask.end(), d, 1);
    mask.insert(mask.end(), 1, 0);
  }
}

double HeadParams::squared_weight_norm() const {
  double acc = W_out.squaredNorm();
  if (kind == HeadKind::Regression) acc += W_hidden.squaredNorm();
  return acc;
}

Eigen::VectorXd head_forward(const HeadParams& head, const Eigen::VectorXd& phi,
                             HeadCache* cache) {
  if (phi.size() != head.d) throw std::invalid_argument("head_forward: feature size mismatch");
  if (cache) cache->phi = phi;

  if (head.kind == HeadKind::Regression) {
    const Eigen::VectorXd hidden = sigmoid(head.W_hidden * phi + head.b_hidden);
    Eigen::VectorXd out = head.W_out * hidden + head.b_out;
    if (cache) {
      cache->hidden = hidden;
      cache->out = out;
    }
    return out;
  }
  Eigen::VectorXd out = sigmoid(head.W_out * phi + head.b_out);
  if (cache) cache->out = out;
  return out;
}

Eigen::VectorXd head_backward(const HeadParams& head, const HeadCache& cache,
                              const Eigen::VectorXd& grad_output, HeadParams& grad_accum) {
  if (grad_output.size() != head.t_out) {
    throw std::invalid_argument("head_backward: gradient size mismatch");
  }
  if (grad_accum.kind != head.kind || grad_accum.d != head.d || grad_accum.t_out != head.t_out) {
    throw std::invalid_argument("head_backward: gradient accumulator shape mismatch");
  }

  if (head.kind == HeadKind::Regression) {
    grad_accum.W_out.noalias() += grad_output * cache.hidden.transpose();
    grad_accum.b_out += grad_output;
    const Eigen::VectorXd d_hidden = head.W_out.transpose() * grad_output;
    const Eigen::VectorXd d_pre = d_hidden.cwiseProduct(
        cache.hidden.cwiseProduct(Eigen::VectorXd::Ones(2 * head.d) - cache.hidden));
    grad_accum.W_hidden.noalias() += d_pre * cache.phi.transpose();
    grad_accum.b_hidden += d_pre;
    return head.W_hidden.transpose() * d_pre;
  }

  const double p = cache.out[0];
  return head_backward_logit(head, cache, grad_output[0] * p * (1.0 - p), grad_accum);
}

Eigen::VectorXd head_backward_logit(const HeadParams& head, const HeadCache& cache,
                                    double grad_logit, HeadParams& grad_accum) {
  if (head.kind != HeadKind::Classification) {
    throw std::invalid_argument("head_backward_logit: classification head required");
  }
  grad_accum.W_out.noalias() += grad_logit * cache.phi.transpose();
  grad_accum.b_out[0] += grad_logit;
  return head.W_out.transpose() * grad_logit;
}

LossValueGrad loss_sq(const Eigen::VectorXd& pred, const Eigen::VectorXd& target) {
  if (pred.size() != target.size()) throw std::invalid_argument("loss_sq: size mismatch");
  const Eigen::VectorXd diff = pred - target;
  return {diff.squaredNorm(), 2.0 * diff};
}

ScalarLossGrad loss_ce(double p, double y) {
  const double q = std::clamp(p, kProbEps, 1.0 - kProbEps);
  return {-y * std::log(q) - (1.0 - y) * std::log(1.0 - q), -y / q + (1.0 - y) / (1.0 - q)};
}

double ce_logit_grad(double p, double y) { return p - y; }

RiskResult empirical_risk(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& labels,
                          LossKind loss, double l2_coeff, double weight_squared_norm) {
  if (predictions.rows() != labels.rows() || predictions.cols() != labels.cols()) {
    throw std::invalid_argument("empirical_risk: prediction/label shape mismatch");
  }
  const int m = static_cast<int>(predictions.rows());
  if (m == 0) throw std::invalid_argument("empirical_risk: empty labeled set");

  double total = 0.0;
  Eigen::MatrixXd grad(m, predictions.cols());
  for (int r = 0; r < m; ++r) {
    if (loss == LossKind::SquaredL2) {
      const auto [value, g] = loss_sq(predictions.row(r).transpose(), labels.row(r).transpose());
      total += value;
      grad.row(r) = g.transpose() / m;
    } else {
      if (predictions.cols() != 1) {
        throw std::invalid_argument("empirical_risk: cross-entropy expects scalar predictions");
      }
      const auto [value, g] = loss_ce(predictions(r, 0), labels(r, 0));
      total += value;
      grad(r, 0) = g / m;
    }
  }
  return {total / m + l2_coeff * weight_squared_norm, std::move(grad)};
}

EvalReport mae_at_ranks(const Eigen::VectorXd& pred_scalar, const Eigen::VectorXd& true_scalar,
                        const std::vector<int>& cutoffs) {
  if (pred_scalar.size() != true_scalar.size()) {
    throw std::invalid_argument("mae_at_ranks: size mismatch");
  }
  const int n = static_cast<int>(true_scalar.size());
  if (n == 0) throw std::invalid_argument("mae_at_ranks: empty evaluation set");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (true_scalar[a] != true_scalar[b]) return true_scalar[a] > true_scalar[b];
    return a < b;
  });

  std::vector<double> abs_err_prefix(n + 1, 0.0);
  std::vector<double> min_true(n + 1, 0.0);
  for (int k = 0; k < n; ++k) {
    const int v = order[k];
    abs_err_prefix[k + 1] = abs_err_prefix[k] + std::abs(pred_scalar[v] - true_scalar[v]);
    min_true[k + 1] = true_scalar[v];  // sorted descending: position k holds the prefix minimum
  }

  EvalReport report;
  report.max_true_score = true_scalar[order.front()];
  for (const int requested : cutoffs) {
    if (requested < 1) throw std::invalid_argument("mae_at_ranks: cutoff must be >= 1");
    const int c = std::min(requested, n);
    report.cutoffs.push_back({requested, c, abs_err_prefix[c] / c, min_true[c]});
  }
  return report;
}

double auc_pr(const Eigen::VectorXd& pred_prob, const Eigen::VectorXd& labels) {
  if (pred_prob.size() != labels.size()) throw std::invalid_argument("auc_pr: size mismatch");
  const int n = static_cast<int>(labels.size());
  if (n == 0) throw std::invalid_argument("auc_pr: empty input");

  int total_pos = 0;
  for (int i = 0; i < n; ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0) {
      throw std::invalid_argument("auc_pr: labels must be 0 or 1");
    }
    total_pos += labels[i] == 1.0;
  }
  if (total_pos == 0 || total_pos == n) {
    throw std::invalid_argument("auc_pr: labels are all one class");
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (pred_prob[a] != pred_prob[b]) return pred_prob[a] > pred_prob[b];
    return a < b;
  });

  // Sweep distinct thresholds; a run of tied scores is one operating point.
  double area = 0.0;
  double prev_recall = 0.0;
  int tp = 0, predicted_pos = 0;
  int k = 0;
  while (k < n) {
    const double score = pred_prob[order[k]];
    while (k < n && pred_prob[order[k]] == score) {
      tp += labels[order[k]] == 1.0;
      ++predicted_pos;
      ++k;
    }
    const double recall = static_cast<double>(tp) / total_pos;
    const double precision = static_cast<double>(tp) / predicted_pos;
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return area;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  if (auc_pr >= 0.0) j["auc_pr"] = auc_pr;
  if (!cutoffs.empty()) {
    j["max_true_score"] = max_true_score;
    auto& arr = j["mae_at_rank"] = nlohmann::json::array();
    for (const auto& c : cutoffs) {
      arr.push_back({{"rank", c.requested},
                     {"effective_rank", c.effective},
                     {"mae", c.mae},
                     {"min_true_score", c.min_true_score}});
    }
  }
  for (const auto& [key, value] : metadata) j["meta"][key] = value;
  return j.dump();
}

std::string EvalReport::to_table() const {
  std::ostringstream os;
  os.precision(6);
  if (!cutoffs.empty()) {
    os << "rank      mae           min_true      \n";
    for (const auto& c : cutoffs) {
      os << std::left;
      os.width(10);
      if (c.requested != c.effective) {
        os << (std::to_string(c.requested) + "->" + std::to_string(c.effective));
      } else {
        os << c.requested;
      }
      os.width(14);
      os << c.mae;
      os.width(14);
      os << c.min_true_score;
      os << "\n";
    }
    os << "max true score: " << max_true_score << "\n";
  }
  if (auc_pr >= 0.0) os << "auc_pr: " << auc_pr << "\n";
  for (const auto& [key, value] : metadata) os << key << ": " << value << "\n";
  return os.str();
}

}  // namespace grnn

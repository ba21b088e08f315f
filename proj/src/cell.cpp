#include "grnn/cell.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace grnn {

namespace {

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

CellParams CellParams::zeros(CellKind kind, int d, int p) {
  if (d < 1) throw std::invalid_argument("cell: feature dimension must be >= 1");
  if (p < 0) throw std::invalid_argument("cell: attribute dimension must be >= 0");
  CellParams params;
  params.kind = kind;
  params.d = d;
  params.p = p;
  if (kind == CellKind::Sigmoid) {
    params.W = Eigen::MatrixXd::Zero(d, d);
    params.W_in = Eigen::MatrixXd::Zero(d, d);
    params.W_out = Eigen::MatrixXd::Zero(d, d);
    params.W_attr = Eigen::MatrixXd::Zero(d, p);
    params.b = Eigen::VectorXd::Zero(d);
  } else {
    for (GruBlock* blk : {&params.update, &params.reset, &params.candidate}) {
      blk->U = Eigen::MatrixXd::Zero(d, d);
      blk->W = Eigen::MatrixXd::Zero(d, 2 * d + p);
      blk->b = Eigen::VectorXd::Zero(d);
    }
  }
  return params;
}

int CellParams::num_params() const {
  if (kind == CellKind::Sigmoid) return 3 * d * d + d * p + d;
  return 3 * (d * d + d * (2 * d + p) + d);
}

void CellParams::write_flat(std::span<double> out) const {
  if (static_cast<int>(out.size()) != num_params()) {
    throw std::invalid_argument("cell write_flat: size mismatch");
  }
  if (kind == CellKind::Sigmoid) {
    write_matrix_row_major(W, out);
    write_matrix_row_major(W_in, out);
    write_matrix_row_major(W_out, out);
    write_matrix_row_major(W_attr, out);
    write_vector(b, out);
  } else {
    for (const GruBlock* blk : {&update, &reset, &candidate}) {
      write_matrix_row_major(blk->U, out);
      write_matrix_row_major(blk->W, out);
      write_vector(blk->b, out);
    }
  }
}

void CellParams::read_flat(std::span<const double> in) {
  if (static_cast<int>(in.size()) != num_params()) {
    throw std::invalid_argument("cell read_flat: size mismatch");
  }
  if (kind == CellKind::Sigmoid) {
    read_matrix_row_major(W, in);
    read_matrix_row_major(W_in, in);
    read_matrix_row_major(W_out, in);
    read_matrix_row_major(W_attr, in);
    read_vector(b, in);
  } else {
    for (GruBlock* blk : {&update, &reset, &candidate}) {
      read_matrix_row_major(blk->U, in);
      read_matrix_row_major(blk->W, in);
      read_vector(blk->b, in);
    }
  }
}

void CellParams::append_weight_mask(std::vector<std::uint8_t>& mask) const {
  if (kind == CellKind::Sigmoid) {
    mask.insert(mask.end(), 3 * d * d + d * p, 1);
    mask.insert(mask.end(), d, 0);
  } else {
    for (int blk = 0; blk < 3; ++blk) {
      mask.insert(mask.end(), d * d + d * (2 * d + p), 1);
      mask.insert(mask.end(), d, 0);
    }
  }
}

double CellParams::squared_weight_norm() const {
  if (kind == CellKind::Sigmoid) {
    return W.squaredNorm() + W_in.squaredNorm() + W_out.squaredNorm() + W_attr.squaredNorm();
  }
  double acc = 0.0;
  for (const GruBlock* blk : {&update, &reset, &candidate}) {
    acc += blk->U.squaredNorm() + blk->W.squaredNorm();
  }
  return acc;
}

Aggregates aggregate(const Eigen::MatrixXd& features_prev, const Graph& g, int i,
                     bool canonical_order) {
  if (i < 0 || i >= g.num_vertices()) throw std::invalid_argument("aggregate: vertex id out of range");
  if (features_prev.rows() != g.num_vertices()) {
    throw std::invalid_argument("aggregate: feature row count does not match |V|");
  }
  const int d = static_cast<int>(features_prev.cols());
  const bool weighted = g.has_edge_attrs();

  Aggregates agg{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
  auto accumulate = [&](std::span<const int> neigh, std::span<const int> eids,
                        Eigen::VectorXd& out) {
    if (!canonical_order) {
      for (std::size_t k = 0; k < neigh.size(); ++k) {
        const double w = weighted ? g.edge_attrs()(eids[k], 0) : 1.0;
        out += w * features_prev.row(neigh[k]).transpose();
      }
    } else {
      // Ascending value order per component: the summation order depends
      // only on the multiset of summands, never on vertex labels.
      std::vector<double> vals(neigh.size());
      for (int c = 0; c < d; ++c) {
        for (std::size_t k = 0; k < neigh.size(); ++k) {
          const double w = weighted ? g.edge_attrs()(eids[k], 0) : 1.0;
          vals[k] = w * features_prev(neigh[k], c);
        }
        std::sort(vals.begin(), vals.end());
        double acc = 0.0;
        for (const double v : vals) acc += v;
        out[c] = acc;
      }
    }
  };
  accumulate(g.in_neighbors(i), g.in_edge_ids(i), agg.phi_in);
  accumulate(g.out_neighbors(i), g.out_edge_ids(i), agg.phi_out);
  return agg;
}

Eigen::VectorXd cell_forward(const CellParams& params, const Eigen::VectorXd& phi_prev,
                             const Aggregates& agg, const Eigen::VectorXd& attr,
                             CellCache* cache) {
  const int d = params.d;
  if (phi_prev.size() != d || agg.phi_in.size() != d || agg.phi_out.size() != d) {
    throw std::invalid_argument("cell_forward: feature dimension mismatch");
  }
  if (attr.size() != params.p) {
    throw std::invalid_argument("cell_forward: attribute dimension mismatch");
  }

  if (cache) {
    cache->phi_prev = phi_prev;
    cache->phi_in = agg.phi_in;
    cache->phi_out = agg.phi_out;
    cache->attr = attr;
  }

  if (params.kind == CellKind::Sigmoid) {
    Eigen::VectorXd pre =
        params.W * phi_prev + params.W_in * agg.phi_in + params.W_out * agg.phi_out + params.b;
    if (params.p > 0) pre += params.W_attr * attr;
    Eigen::VectorXd y = sigmoid(pre);
    if (cache) cache->y = y;
    return y;
  }

  Eigen::VectorXd x(2 * d + params.p);
  x.head(d) = agg.phi_in;
  x.segment(d, d) = agg.phi_out;
  if (params.p > 0) x.tail(params.p) = attr;

  const Eigen::VectorXd z = sigmoid(params.update.U * phi_prev + params.update.W * x + params.update.b);
  const Eigen::VectorXd r = sigmoid(params.reset.U * phi_prev + params.reset.W * x + params.reset.b);
  const Eigen::VectorXd c =
      (params.candidate.U * r.cwiseProduct(phi_prev) + params.candidate.W * x + params.candidate.b)
          .array()
          .tanh();
  if (cache) {
    cache->z = z;
    cache->r = r;
    cache->c = c;
  }
  return z.cwiseProduct(phi_prev) + (Eigen::VectorXd::Ones(d) - z).cwiseProduct(c);
}

CellInputGrads cell_backward(const CellParams& params, const CellCache& cache,
                             const Eigen::VectorXd& grad_output, CellParams& grad_accum) {
  const int d = params.d;
  if (grad_output.size() != d) throw std::invalid_argument("cell_backward: gradient size mismatch");
  if (grad_accum.kind != params.kind || grad_accum.d != params.d || grad_accum.p != params.p) {
    throw std::invalid_argument("cell_backward: gradient accumulator shape mismatch");
  }
  if (cache.phi_prev.size() != d) throw std::invalid_argument("cell_backward: cache/params mismatch");

  CellInputGrads grads;

  if (params.kind == CellKind::Sigmoid) {
    if (cache.y.size() != d) throw std::invalid_argument("cell_backward: cache missing output");
    const Eigen::VectorXd u =
        grad_output.cwiseProduct(cache.y.cwiseProduct(Eigen::VectorXd::Ones(d) - cache.y));
    grads.phi_prev = params.W.transpose() * u;
    grads.phi_in = params.W_in.transpose() * u;
    grads.phi_out = params.W_out.transpose() * u;
    grad_accum.W.noalias() += u * cache.phi_prev.transpose();
    grad_accum.W_in.noalias() += u * cache.phi_in.transpose();
    grad_accum.W_out.noalias() += u * cache.phi_out.transpose();
    if (params.p > 0) grad_accum.W_attr.noalias() += u * cache.attr.transpose();
    grad_accum.b += u;
    return grads;
  }

  if (cache.z.size() != d || cache.r.size() != d || cache.c.size() != d) {
    throw std::invalid_argument("cell_backward: cache missing gate activations");
  }
  const Eigen::VectorXd& h = cache.phi_prev;
  const Eigen::VectorXd& z = cache.z;
  const Eigen::VectorXd& r = cache.r;
  const Eigen::VectorXd& c = cache.c;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(d);

  Eigen::VectorXd x(2 * d + params.p);
  x.head(d) = cache.phi_in;
  x.segment(d, d) = cache.phi_out;
  if (params.p > 0) x.tail(params.p) = cache.attr;

  // out = z (.) h + (1-z) (.) c
  const Eigen::VectorXd dz = grad_output.cwiseProduct(h - c);
  const Eigen::VectorXd dc = grad_output.cwiseProduct(ones - z);
  const Eigen::VectorXd da_z = dz.cwiseProduct(z).cwiseProduct(ones - z);
  const Eigen::VectorXd da_c = dc.cwiseProduct(ones - c.cwiseProduct(c));

  const Eigen::VectorXd d_rh = params.candidate.U.transpose() * da_c;
  const Eigen::VectorXd dr = d_rh.cwiseProduct(h);
  const Eigen::VectorXd da_r = dr.cwiseProduct(r).cwiseProduct(ones - r);

  Eigen::VectorXd dh = grad_output.cwiseProduct(z) + d_rh.cwiseProduct(r);
  dh.noalias() += params.update.U.transpose() * da_z;
  dh.noalias() += params.reset.U.transpose() * da_r;

  Eigen::VectorXd dx = params.update.W.transpose() * da_z;
  dx.noalias() += params.reset.W.transpose() * da_r;
  dx.noalias() += params.candidate.W.transpose() * da_c;

  grad_accum.update.U.noalias() += da_z * h.transpose();
  grad_accum.update.W.noalias() += da_z * x.transpose();
  grad_accum.update.b += da_z;
  grad_accum.reset.U.noalias() += da_r * h.transpose();
  grad_accum.reset.W.noalias() += da_r * x.transpose();
  grad_accum.reset.b += da_r;
  grad_accum.candidate.U.noalias() += da_c * r.cwiseProduct(h).transpose();
  grad_accum.candidate.W.noalias() += da_c * x.transpose();
  grad_accum.candidate.b += da_c;

  grads.phi_prev = std::move(dh);
  grads.phi_in = dx.head(d);
  grads.phi_out = dx.segment(d, d);
  return grads;
}

}  // namespace grnn

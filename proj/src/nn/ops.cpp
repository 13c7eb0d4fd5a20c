// Copyright 2026 The guru Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "guru/nn/ops.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "guru/util/error.hpp"

namespace guru::nn {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvariantError(std::string(op) + ": shape mismatch " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
}

Tape& tape_of(Var a) { return *a.tape(); }

double stable_softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) throw InvariantError("matmul: inner dimension mismatch");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).push(a.value() * b.value(), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) t.grad(ia).noalias() += g * t.value(ib).transpose();
    if (t.requires_grad(ib)) t.grad(ib).noalias() += t.value(ia).transpose() * g;
  });
}

Var matmul_nt(Var a, Var b) {
  if (a.cols() != b.cols()) throw InvariantError("matmul_nt: inner dimension mismatch");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).push(a.value() * b.value().transpose(), {a, b},
                         [ia, ib](Tape& t, int self) {
                           const Matrix& g = t.grad(self);
                           if (t.requires_grad(ia)) t.grad(ia).noalias() += g * t.value(ib);
                           if (t.requires_grad(ib))
                             t.grad(ib).noalias() += g.transpose() * t.value(ia);
                         });
}

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).push(a.value() + b.value(), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) t.grad(ia) += g;
    if (t.requires_grad(ib)) t.grad(ib) += g;
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "sub");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).push(a.value() - b.value(), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) t.grad(ia) += g;
    if (t.requires_grad(ib)) t.grad(ib) -= g;
  });
}

Var add_bias(Var x, Var bias) {
  if (bias.rows() != 1 || bias.cols() != x.cols())
    throw InvariantError("add_bias: bias must be 1 x cols");
  const int ix = x.id(), ib = bias.id();
  Matrix out = x.value();
  out.rowwise() += bias.value().row(0);
  return tape_of(x).push(std::move(out), {x, bias}, [ix, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ix)) t.grad(ix) += g;
    if (t.requires_grad(ib)) t.grad(ib) += g.colwise().sum();
  });
}

Var scale(Var a, double c) {
  const int ia = a.id();
  return tape_of(a).push(a.value() * c, {a}, [ia, c](Tape& t, int self) {
    t.grad(ia) += c * t.grad(self);
  });
}

Var add_scalar(Var a, double c) {
  const int ia = a.id();
  return tape_of(a).push(a.value().array() + c, {a},
                         [ia](Tape& t, int self) { t.grad(ia) += t.grad(self); });
}

Var mul(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "mul");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).push(a.value().cwiseProduct(b.value()), {a, b},
                         [ia, ib](Tape& t, int self) {
                           const Matrix& g = t.grad(self);
                           if (t.requires_grad(ia)) t.grad(ia) += g.cwiseProduct(t.value(ib));
                           if (t.requires_grad(ib)) t.grad(ib) += g.cwiseProduct(t.value(ia));
                         });
}

Var mul_const(Var a, const Matrix& mask) {
  require_same_shape(a.value(), mask, "mul_const");
  const int ia = a.id();
  return tape_of(a).push(a.value().cwiseProduct(mask), {a}, [ia, mask](Tape& t, int self) {
    t.grad(ia) += t.grad(self).cwiseProduct(mask);
  });
}

Var relu(Var a) {
  const int ia = a.id();
  return tape_of(a).push(a.value().cwiseMax(0.0), {a}, [ia](Tape& t, int self) {
    t.grad(ia) += (t.value(ia).array() > 0.0).select(t.grad(self), 0.0).matrix();
  });
}

Var leaky_relu(Var a, double slope) {
  const int ia = a.id();
  Matrix out = (a.value().array() > 0.0).select(a.value(), slope * a.value());
  return tape_of(a).push(std::move(out), {a}, [ia, slope](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    t.grad(ia) += (t.value(ia).array() > 0.0).select(g, slope * g).matrix();
  });
}

Var softplus(Var a) {
  const int ia = a.id();
  Matrix out = a.value().unaryExpr([](double x) { return stable_softplus(x); });
  return tape_of(a).push(std::move(out), {a}, [ia](Tape& t, int self) {
    t.grad(ia) += t.grad(self).cwiseProduct(
        t.value(ia).unaryExpr([](double x) { return sigmoid(x); }));
  });
}

Var square(Var a) {
  const int ia = a.id();
  return tape_of(a).push(a.value().array().square().matrix(), {a}, [ia](Tape& t, int self) {
    t.grad(ia) += 2.0 * t.grad(self).cwiseProduct(t.value(ia));
  });
}

Var sum(Var a) {
  const int ia = a.id();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return tape_of(a).push(std::move(out), {a}, [ia](Tape& t, int self) {
    t.grad(ia).array() += t.grad(self)(0, 0);
  });
}

Var mean(Var a) {
  if (a.value().size() == 0) throw InvariantError("mean of empty matrix");
  const int ia = a.id();
  const double n = static_cast<double>(a.value().size());
  Matrix out(1, 1);
  out(0, 0) = a.value().sum() / n;
  return tape_of(a).push(std::move(out), {a}, [ia, n](Tape& t, int self) {
    t.grad(ia).array() += t.grad(self)(0, 0) / n;
  });
}

Var row_dot(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "row_dot");
  const int ia = a.id(), ib = b.id();
  Matrix out = a.value().cwiseProduct(b.value()).rowwise().sum();
  return tape_of(a).push(std::move(out), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia))
      t.grad(ia).array() += t.value(ib).array().colwise() * g.col(0).array();
    if (t.requires_grad(ib))
      t.grad(ib).array() += t.value(ia).array().colwise() * g.col(0).array();
  });
}

Var row_l2_norm(Var a) {
  const int ia = a.id();
  Matrix out = a.value().rowwise().norm();
  return tape_of(a).push(out, {a}, [ia, out](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    const Matrix& x = t.value(ia);
    Matrix& gx = t.grad(ia);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      if (out(r, 0) > 0.0) gx.row(r) += (g(r, 0) / out(r, 0)) * x.row(r);
    }
  });
}

Var gather_rows(Var table, const std::vector<int>& index) {
  const Matrix& tv = table.value();
  Matrix out(static_cast<Eigen::Index>(index.size()), tv.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= tv.rows())
      throw InvariantError("gather_rows: index " + std::to_string(index[i]) +
                           " outside table of " + std::to_string(tv.rows()) + " rows");
    out.row(static_cast<Eigen::Index>(i)) = tv.row(index[i]);
  }
  const int it = table.id();
  return tape_of(table).push(std::move(out), {table}, [it, index](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Matrix& gt = t.grad(it);
    for (std::size_t i = 0; i < index.size(); ++i)
      gt.row(index[i]) += g.row(static_cast<Eigen::Index>(i));
  });
}

Var segment_mean_rows(Var x, int group) {
  const Matrix& xv = x.value();
  if (group <= 0 || xv.rows() % group != 0)
    throw InvariantError("segment_mean_rows: rows not divisible by group");
  const Eigen::Index n = xv.rows() / group;
  Matrix out = Matrix::Zero(n, xv.cols());
  for (Eigen::Index r = 0; r < xv.rows(); ++r) out.row(r / group) += xv.row(r);
  out /= static_cast<double>(group);
  const int ix = x.id();
  return tape_of(x).push(std::move(out), {x}, [ix, group](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Matrix& gx = t.grad(ix);
    for (Eigen::Index r = 0; r < gx.rows(); ++r)
      gx.row(r) += g.row(r / group) / static_cast<double>(group);
  });
}

Var concat_rows(Var a, Var b) {
  if (a.cols() != b.cols()) throw InvariantError("concat_rows: column mismatch");
  Matrix out(a.rows() + b.rows(), a.cols());
  out.topRows(a.rows()) = a.value();
  out.bottomRows(b.rows()) = b.value();
  const int ia = a.id(), ib = b.id();
  const Eigen::Index ra = a.rows(), rb = b.rows();
  return tape_of(a).push(std::move(out), {a, b}, [ia, ib, ra, rb](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) t.grad(ia) += g.topRows(ra);
    if (t.requires_grad(ib)) t.grad(ib) += g.bottomRows(rb);
  });
}

Var broadcast_rows(Var row, Eigen::Index n) {
  if (row.rows() != 1) throw InvariantError("broadcast_rows: expects one row");
  Matrix out = row.value().replicate(n, 1);
  const int ir = row.id();
  return tape_of(row).push(std::move(out), {row}, [ir](Tape& t, int self) {
    t.grad(ir) += t.grad(self).colwise().sum();
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  const Matrix& xv = x.value();
  const Eigen::Index rows = xv.rows(), cols = xv.cols();
  if (gain.cols() != cols || bias.cols() != cols)
    throw InvariantError("layer_norm: gain/bias width mismatch");
  Matrix xhat(rows, cols);
  Eigen::VectorXd inv_std(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double mu = xv.row(r).mean();
    const double var = (xv.row(r).array() - mu).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (xv.row(r).array() - mu) * inv_std(r);
  }
  Matrix out = xhat.array().rowwise() * gain.value().row(0).array();
  out.rowwise() += bias.value().row(0);
  const int ix = x.id(), ig = gain.id(), ib = bias.id();
  return tape_of(x).push(
      std::move(out), {x, gain, bias},
      [ix, ig, ib, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        if (t.requires_grad(ig)) t.grad(ig) += g.cwiseProduct(xhat).colwise().sum();
        if (t.requires_grad(ib)) t.grad(ib) += g.colwise().sum();
        if (t.requires_grad(ix)) {
          Matrix dxhat = g.array().rowwise() * t.value(ig).row(0).array();
          Matrix& gx = t.grad(ix);
          for (Eigen::Index r = 0; r < dxhat.rows(); ++r) {
            const double m1 = dxhat.row(r).mean();
            const double m2 = dxhat.row(r).dot(xhat.row(r)) / static_cast<double>(dxhat.cols());
            gx.row(r).array() +=
                inv_std(r) * (dxhat.row(r).array() - m1 - xhat.row(r).array() * m2);
          }
        }
      });
}

Var attention(Var q, Var k, Var v, const AttentionShape& s) {
  const Matrix& qv = q.value();
  const Matrix& kv = k.value();
  const Matrix& vv = v.value();
  const Eigen::Index d = qv.cols();
  if (s.heads <= 0 || d % s.heads != 0)
    throw InvariantError("attention: width not divisible by head count");
  if (qv.rows() != static_cast<Eigen::Index>(s.batch) * s.q_len ||
      kv.rows() != static_cast<Eigen::Index>(s.batch) * s.k_len ||
      vv.rows() != kv.rows() || kv.cols() != d || vv.cols() != d)
    throw InvariantError("attention: operand shapes disagree with AttentionShape");
  if (s.causal && s.q_len != s.k_len)
    throw InvariantError("attention: causal masking needs q_len == k_len");
  if (!s.key_mask.empty() && s.key_mask.size() != static_cast<std::size_t>(kv.rows()))
    throw InvariantError("attention: key mask length mismatch");

  const int dh = static_cast<int>(d) / s.heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Matrix> probs(static_cast<std::size_t>(s.batch) * s.heads);
  Matrix out(qv.rows(), d);
  Matrix scores(s.q_len, s.k_len);
  for (int b = 0; b < s.batch; ++b) {
    for (int h = 0; h < s.heads; ++h) {
      auto qb = qv.block(static_cast<Eigen::Index>(b) * s.q_len, h * dh, s.q_len, dh);
      auto kb = kv.block(static_cast<Eigen::Index>(b) * s.k_len, h * dh, s.k_len, dh);
      auto vb = vv.block(static_cast<Eigen::Index>(b) * s.k_len, h * dh, s.k_len, dh);
      scores.noalias() = (qb * kb.transpose()) * inv_sqrt;
      Matrix& p = probs[static_cast<std::size_t>(b) * s.heads + h];
      p.setZero(s.q_len, s.k_len);
      for (int i = 0; i < s.q_len; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        const int jmax = s.causal ? i + 1 : s.k_len;
        for (int j = 0; j < jmax; ++j) {
          if (!s.key_mask.empty() && !s.key_mask[static_cast<std::size_t>(b) * s.k_len + j])
            continue;
          mx = std::max(mx, scores(i, j));
        }
        if (mx == -std::numeric_limits<double>::infinity()) continue;
        double z = 0.0;
        for (int j = 0; j < jmax; ++j) {
          if (!s.key_mask.empty() && !s.key_mask[static_cast<std::size_t>(b) * s.k_len + j])
            continue;
          p(i, j) = std::exp(scores(i, j) - mx);
          z += p(i, j);
        }
        p.row(i) /= z;
      }
      out.block(static_cast<Eigen::Index>(b) * s.q_len, h * dh, s.q_len, dh).noalias() = p * vb;
    }
  }

  const int iq = q.id(), ik = k.id(), iv = v.id();
  const int batch = s.batch, heads = s.heads, q_len = s.q_len, k_len = s.k_len;
  return tape_of(q).push(
      std::move(out), {q, k, v},
      [=, probs = std::move(probs)](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        const Matrix& qv = t.value(iq);
        const Matrix& kv = t.value(ik);
        const Matrix& vv = t.value(iv);
        const bool gq = t.requires_grad(iq), gk = t.requires_grad(ik), gv = t.requires_grad(iv);
        Matrix dp, ds;
        for (int b = 0; b < batch; ++b) {
          for (int h = 0; h < heads; ++h) {
            const Matrix& p = probs[static_cast<std::size_t>(b) * heads + h];
            const Eigen::Index qr = static_cast<Eigen::Index>(b) * q_len;
            const Eigen::Index kr = static_cast<Eigen::Index>(b) * k_len;
            auto gb = g.block(qr, h * dh, q_len, dh);
            if (gv) t.grad(iv).block(kr, h * dh, k_len, dh).noalias() += p.transpose() * gb;
            if (!gq && !gk) continue;
            dp.noalias() = gb * vv.block(kr, h * dh, k_len, dh).transpose();
            // softmax backward: dS = P ⊙ (dP − rowsum(P ⊙ dP))
            const Eigen::VectorXd row = p.cwiseProduct(dp).rowwise().sum();
            ds = p.array() * (dp.array().colwise() - row.array());
            ds *= inv_sqrt;
            if (gq)
              t.grad(iq).block(qr, h * dh, q_len, dh).noalias() +=
                  ds * kv.block(kr, h * dh, k_len, dh);
            if (gk)
              t.grad(ik).block(kr, h * dh, k_len, dh).noalias() +=
                  ds.transpose() * qv.block(qr, h * dh, q_len, dh);
          }
        }
      });
}

Var dropout(Var x, double rate, Rng& rng) {
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw InvariantError("dropout rate must be < 1");
  const Matrix& xv = x.value();
  Matrix mask(xv.rows(), xv.cols());
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < mask.size(); ++i)
    mask.data()[i] = rng.uniform() < rate ? 0.0 : keep_scale;
  return mul_const(x, mask);
}

Var candidate_softmax_xent(
    Var hidden, Var table,
    const Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& candidates) {
  const Matrix& hv = hidden.value();
  const Matrix& tv = table.value();
  const Eigen::Index rows = hv.rows(), width = candidates.cols();
  if (candidates.rows() != rows) throw InvariantError("candidate rows != hidden rows");
  if (rows == 0 || width == 0) throw InvariantError("candidate_softmax_xent: empty input");
  if (tv.cols() != hv.cols()) throw InvariantError("candidate_softmax_xent: width mismatch");
  for (Eigen::Index i = 0; i < candidates.size(); ++i) {
    const int c = candidates.data()[i];
    if (c < 0 || c >= tv.rows())
      throw InvariantError("candidate index " + std::to_string(c) + " out of table range");
  }
  Matrix softmax(rows, width);
  double total = 0.0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index j = 0; j < width; ++j) softmax(r, j) = hv.row(r).dot(tv.row(candidates(r, j)));
    const double mx = softmax.row(r).maxCoeff();
    softmax.row(r) = (softmax.row(r).array() - mx).exp();
    const double z = softmax.row(r).sum();
    softmax.row(r) /= z;
    total += -std::log(softmax(r, 0));
  }
  Matrix out(1, 1);
  out(0, 0) = total / static_cast<double>(rows);
  const int ih = hidden.id(), it = table.id();
  return tape_of(hidden).push(
      std::move(out), {hidden, table},
      [ih, it, candidates, softmax = std::move(softmax)](Tape& t, int self) {
        const double g = t.grad(self)(0, 0) / static_cast<double>(softmax.rows());
        const Matrix& hv = t.value(ih);
        const Matrix& tv = t.value(it);
        const bool gh = t.requires_grad(ih), gt = t.requires_grad(it);
        for (Eigen::Index r = 0; r < softmax.rows(); ++r) {
          for (Eigen::Index j = 0; j < softmax.cols(); ++j) {
            const double dl = g * (softmax(r, j) - (j == 0 ? 1.0 : 0.0));
            if (gh) t.grad(ih).row(r) += dl * tv.row(candidates(r, j));
            if (gt) t.grad(it).row(candidates(r, j)) += dl * hv.row(r);
          }
        }
      });
}

}  // namespace guru::nn

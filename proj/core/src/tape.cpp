#include "swarm/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "eigen_maps.hpp"

namespace swarm::ad {

using detail::block;
using detail::map;

namespace {

void require(bool ok, const char* op, const std::string& what) {
  if (!ok) throw std::invalid_argument(std::string(op) + ": " + what);
}

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Var Tape::constant(Matrix value) { return push(std::move(value), false, nullptr); }

Var Tape::param(const ParamStore& store, std::size_t index) {
  Node node;
  node.ref = &store.value(index);
  node.needs_grad = record_;
  node.param = index;
  nodes_.push_back(std::move(node));
  return {static_cast<int>(nodes_.size()) - 1};
}

const Matrix& Tape::value(Var v) const {
  const auto& node = nodes_.at(static_cast<std::size_t>(v.id));
  return node.ref != nullptr ? *node.ref : node.value;
}

Var Tape::push(Matrix value, bool needs_grad, Backward backward) {
  Node node;
  node.value = std::move(value);
  node.needs_grad = record_ && needs_grad;
  if (node.needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return {static_cast<int>(nodes_.size()) - 1};
}

Matrix& Tape::grad(int id) {
  auto& node = nodes_[static_cast<std::size_t>(id)];
  if (node.grad.empty()) {
    const Matrix& v = node.ref != nullptr ? *node.ref : node.value;
    node.grad = Matrix(v.rows(), v.cols());
  }
  return node.grad;
}

void Tape::backward(Var loss, ParamStore& grads) {
  const Matrix& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw std::invalid_argument("backward: loss must be 1x1, got " + shape(lv));
  }
  if (needs_grad(loss)) {
    grad(loss.id)(0, 0) = 1.0;
    for (int id = loss.id; id >= 0; --id) {
      auto& node = nodes_[static_cast<std::size_t>(id)];
      if (!node.needs_grad || node.grad.empty()) continue;
      if (node.ref != nullptr) {
        Matrix& g = grads.grad(node.param);
        if (!g.same_shape(node.grad)) {
          throw std::invalid_argument("backward: gradient shape mismatch for " +
                                      grads.name(node.param));
        }
        map(g) += map(node.grad);
      } else if (node.backward) {
        node.backward(*this, id);
      }
    }
  }
  clear();
}

void Tape::clear() {
  nodes_.clear();
  relu_log_.clear();
}

Var matmul(Tape& t, Var a, Var b) {
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  require(av.cols() == bv.rows(), "matmul", shape(av) + " * " + shape(bv));
  Matrix out(av.rows(), bv.cols());
  map(out).noalias() = map(av) * map(bv);
  const bool ng = t.needs_grad(a) || t.needs_grad(b);
  return t.push(std::move(out), ng, [a, b](Tape& tp, int self) {
    const Matrix& g = tp.out_grad(self);
    if (tp.needs_grad(a)) map(tp.grad(a.id)).noalias() += map(g) * map(tp.value(b)).transpose();
    if (tp.needs_grad(b)) map(tp.grad(b.id)).noalias() += map(tp.value(a)).transpose() * map(g);
  });
}

Var add_row_bias(Tape& t, Var x, Var b) {
  const Matrix& xv = t.value(x);
  const Matrix& bv = t.value(b);
  require(bv.rows() == 1 && bv.cols() == xv.cols(), "add_row_bias", shape(xv) + " + " + shape(bv));
  Matrix out = xv;
  map(out).rowwise() += map(bv).row(0);
  const bool ng = t.needs_grad(x) || t.needs_grad(b);
  return t.push(std::move(out), ng, [x, b](Tape& tp, int self) {
    const Matrix& g = tp.out_grad(self);
    if (tp.needs_grad(x)) map(tp.grad(x.id)) += map(g);
    if (tp.needs_grad(b)) map(tp.grad(b.id)).row(0) += map(g).colwise().sum();
  });
}

Var affine(Tape& t, Var x, Var w, Var b) { return add_row_bias(t, matmul(t, x, w), b); }

Var add(Tape& t, Var a, Var b) {
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  require(av.same_shape(bv), "add", shape(av) + " + " + shape(bv));
  Matrix out = av;
  map(out) += map(bv);
  const bool ng = t.needs_grad(a) || t.needs_grad(b);
  return t.push(std::move(out), ng, [a, b](Tape& tp, int self) {
    const Matrix& g = tp.out_grad(self);
    if (tp.needs_grad(a)) map(tp.grad(a.id)) += map(g);
    if (tp.needs_grad(b)) map(tp.grad(b.id)) += map(g);
  });
}

Var scale(Tape& t, Var x, double s) {
  Matrix out = t.value(x);
  map(out) *= s;
  return t.push(std::move(out), t.needs_grad(x), [x, s](Tape& tp, int self) {
    map(tp.grad(x.id)) += s * map(tp.out_grad(self));
  });
}

Var relu(Tape& t, Var x) {
  const Matrix& xv = t.value(x);
  Matrix out(xv.rows(), xv.cols());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  if (t.tracking_relu()) {
    auto& log = t.relu_log();
    for (std::size_t i = 0; i < xv.size(); ++i) log.push_back(xv[i] > 0.0 ? 1 : 0);
  }
  return t.push(std::move(out), t.needs_grad(x), [x](Tape& tp, int self) {
    const Matrix& g = tp.out_grad(self);
    const Matrix& in = tp.value(x);
    Matrix& gx = tp.grad(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (in[i] > 0.0) gx[i] += g[i];
    }
  });
}

Var concat_cols(Tape& t, std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols", "no inputs");
  const int rows = t.value(parts[0]).rows();
  int cols = 0;
  bool ng = false;
  for (Var p : parts) {
    require(t.value(p).rows() == rows, "concat_cols", "row count mismatch");
    cols += t.value(p).cols();
    ng = ng || t.needs_grad(p);
  }
  Matrix out(rows, cols);
  int off = 0;
  for (Var p : parts) {
    const Matrix& pv = t.value(p);
    block(out, 0, rows, off, pv.cols()) = map(pv);
    off += pv.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.push(std::move(out), ng, [inputs = std::move(inputs)](Tape& tp, int self) {
    const Matrix& g = tp.out_grad(self);
    int off = 0;
    for (Var p : inputs) {
      const int w = tp.value(p).cols();
      if (tp.needs_grad(p)) map(tp.grad(p.id)) += block(g, 0, g.rows(), off, w);
      off += w;
    }
  });
}

Var gather_rows(Tape& t, Var x, std::vector<int> rows) {
  const Matrix& xv = t.value(x);
  Matrix out(static_cast<int>(rows.size()), xv.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require(rows[r] >= 0 && rows[r] < xv.rows(), "gather_rows", "row index out of range");
    auto src = xv.row(rows[r]);
    std::copy(src.begin(), src.end(), out.row(static_cast<int>(r)).begin());
  }
  return t.push(std::move(out), t.needs_grad(x), [x, rows = std::move(rows)](Tape& tp, int self) {
    const Matrix& g = tp.out_grad(self);
    Matrix& gx = tp.grad(x.id);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      auto src = g.row(static_cast<int>(r));
      auto dst = gx.row(rows[r]);
      for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
    }
  });
}

Var pick_cols(Tape& t, Var x, std::vector<int> cols) {
  const Matrix& xv = t.value(x);
  require(static_cast<int>(cols.size()) == xv.rows(), "pick_cols", "one column per row expected");
  Matrix out(xv.rows(), 1);
  for (int r = 0; r < xv.rows(); ++r) {
    require(cols[r] >= 0 && cols[r] < xv.cols(), "pick_cols", "column index out of range");
    out(r, 0) = xv(r, cols[static_cast<std::size_t>(r)]);
  }
  return t.push(std::move(out), t.needs_grad(x), [x, cols = std::move(cols)](Tape& tp, int self) {
    const Matrix& g = tp.out_grad(self);
    Matrix& gx = tp.grad(x.id);
    for (int r = 0; r < g.rows(); ++r) gx(r, cols[static_cast<std::size_t>(r)]) += g(r, 0);
  });
}

Var sum(Tape& t, Var x) {
  Matrix out(1, 1, map(t.value(x)).sum());
  return t.push(std::move(out), t.needs_grad(x), [x](Tape& tp, int self) {
    map(tp.grad(x.id)).array() += tp.out_grad(self)(0, 0);
  });
}

Var mean(Tape& t, Var x) {
  const auto n = static_cast<double>(t.value(x).size());
  require(n > 0, "mean", "empty input");
  return scale(t, sum(t, x), 1.0 / n);
}

Var softmax_rows(Tape& t, Var x, const Matrix& mask) {
  const Matrix& xv = t.value(x);
  require(mask.same_shape(xv), "softmax_rows", "mask " + shape(mask) + " vs " + shape(xv));
  Matrix out(xv.rows(), xv.cols());
  for (int r = 0; r < xv.rows(); ++r) {
    double peak = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < xv.cols(); ++c) {
      if (mask(r, c) != 0.0) peak = std::max(peak, xv(r, c));
    }
    if (peak == -std::numeric_limits<double>::infinity()) continue;
    double total = 0.0;
    for (int c = 0; c < xv.cols(); ++c) {
      if (mask(r, c) != 0.0) {
        out(r, c) = std::exp(xv(r, c) - peak);
        total += out(r, c);
      }
    }
    const double inv = 1.0 / total;
    for (int c = 0; c < xv.cols(); ++c) out(r, c) *= inv;
  }
  return t.push(std::move(out), t.needs_grad(x), [x](Tape& tp, int self) {
    const Matrix& g = tp.out_grad(self);
    const Matrix& y = tp.value(Var{self});
    Matrix& gx = tp.grad(x.id);
    for (int r = 0; r < g.rows(); ++r) {
      double dot = 0.0;
      for (int c = 0; c < g.cols(); ++c) dot += g(r, c) * y(r, c);
      for (int c = 0; c < g.cols(); ++c) gx(r, c) += y(r, c) * (g(r, c) - dot);
    }
  });
}

Var weighted_mse(Tape& t, Var pred, std::span<const double> targets,
                 std::span<const double> weights) {
  const Matrix& pv = t.value(pred);
  require(pv.cols() == 1 && static_cast<std::size_t>(pv.rows()) == targets.size() &&
              targets.size() == weights.size() && !targets.empty(),
          "weighted_mse", "prediction " + shape(pv) + " vs targets/weights");
  const auto n = static_cast<double>(targets.size());
  double loss = 0.0;
  for (int i = 0; i < pv.rows(); ++i) {
    const double r = targets[static_cast<std::size_t>(i)] - pv(i, 0);
    loss += weights[static_cast<std::size_t>(i)] * r * r;
  }
  std::vector<double> coeff(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    coeff[i] = -2.0 * weights[i] * (targets[i] - pv(static_cast<int>(i), 0)) / n;
  }
  return t.push(Matrix(1, 1, loss / n), t.needs_grad(pred),
                [pred, coeff = std::move(coeff)](Tape& tp, int self) {
                  const double g = tp.out_grad(self)(0, 0);
                  Matrix& gp = tp.grad(pred.id);
                  for (std::size_t i = 0; i < coeff.size(); ++i) {
                    gp(static_cast<int>(i), 0) += g * coeff[i];
                  }
                });
}

Var block_scores(Tape& t, Var q, Var k, int blocks, int n, int off, int w, double s) {
  const Matrix& qv = t.value(q);
  const Matrix& kv = t.value(k);
  require(qv.rows() == blocks * n && kv.rows() == blocks * n && off + w <= qv.cols() &&
              off + w <= kv.cols(),
          "block_scores", "layout mismatch " + shape(qv) + " / " + shape(kv));
  Matrix out(blocks * n, n);
  for (int g = 0; g < blocks; ++g) {
    block(out, g * n, n, 0, n).noalias() =
        s * block(qv, g * n, n, off, w) * block(kv, g * n, n, off, w).transpose();
  }
  const bool ng = t.needs_grad(q) || t.needs_grad(k);
  return t.push(std::move(out), ng, [=](Tape& tp, int self) {
    const Matrix& gs = tp.out_grad(self);
    for (int g = 0; g < blocks; ++g) {
      auto gblk = block(gs, g * n, n, 0, n);
      if (tp.needs_grad(q)) {
        block(tp.grad(q.id), g * n, n, off, w).noalias() +=
            s * gblk * block(tp.value(k), g * n, n, off, w);
      }
      if (tp.needs_grad(k)) {
        block(tp.grad(k.id), g * n, n, off, w).noalias() +=
            s * gblk.transpose() * block(tp.value(q), g * n, n, off, w);
      }
    }
  });
}

Var add_scaled_const(Tape& t, Var x, Var coeff, int c, const Matrix& d) {
  const Matrix& xv = t.value(x);
  const Matrix& cv = t.value(coeff);
  require(d.same_shape(xv) && cv.rows() == 1 && c >= 0 && c < cv.cols(), "add_scaled_const",
          shape(xv) + " with coefficient " + shape(cv));
  const double a = cv(0, c);
  Matrix out = xv;
  map(out) += a * map(d);
  const bool ng = t.needs_grad(x) || t.needs_grad(coeff);
  return t.push(std::move(out), ng, [x, coeff, c, d](Tape& tp, int self) {
    const Matrix& g = tp.out_grad(self);
    if (tp.needs_grad(x)) map(tp.grad(x.id)) += map(g);
    if (tp.needs_grad(coeff)) tp.grad(coeff.id)(0, c) += map(g).cwiseProduct(map(d)).sum();
  });
}

Var block_attend(Tape& t, Var alpha, Var v, int blocks, int n, int off, int w) {
  const Matrix& av = t.value(alpha);
  const Matrix& vv = t.value(v);
  require(av.rows() == blocks * n && av.cols() == n && vv.rows() == blocks * n &&
              off + w <= vv.cols(),
          "block_attend", "layout mismatch " + shape(av) + " / " + shape(vv));
  Matrix out(blocks * n, w);
  for (int g = 0; g < blocks; ++g) {
    block(out, g * n, n, 0, w).noalias() =
        block(av, g * n, n, 0, n) * block(vv, g * n, n, off, w);
  }
  const bool ng = t.needs_grad(alpha) || t.needs_grad(v);
  return t.push(std::move(out), ng, [=](Tape& tp, int self) {
    const Matrix& go = tp.out_grad(self);
    for (int g = 0; g < blocks; ++g) {
      auto gblk = block(go, g * n, n, 0, w);
      if (tp.needs_grad(alpha)) {
        block(tp.grad(alpha.id), g * n, n, 0, n).noalias() +=
            gblk * block(tp.value(v), g * n, n, off, w).transpose();
      }
      if (tp.needs_grad(v)) {
        block(tp.grad(v.id), g * n, n, off, w).noalias() +=
            block(tp.value(alpha), g * n, n, 0, n).transpose() * gblk;
      }
    }
  });
}

}  // namespace swarm::ad

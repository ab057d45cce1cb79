#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "swarm/matrix.hpp"
#include "swarm/param_store.hpp"

namespace swarm::ad {

/// Handle to a value recorded on a Tape.
struct Var {
  int id = -1;
};

/// Reverse-mode recording of matrix-level operations.
///
/// A non-recording tape evaluates the same ops without storing backward
/// closures; it is the inference path. Parameter leaves reference the store
/// they came from and must not outlive it.
class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  explicit Tape(bool record = true) : record_(record) {}

  Var constant(Matrix value);
  Var param(const ParamStore& store, std::size_t index);

  const Matrix& value(Var v) const;
  bool recording() const { return record_; }
  bool needs_grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].needs_grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Accumulates d(loss)/d(param) into `grads` for every parameter leaf and
  /// clears the tape. `loss` must be 1x1.
  void backward(Var loss, ParamStore& grads);
  void clear();

  /// When enabled, every relu appends its activation pattern to relu_log().
  void set_track_relu(bool on) { track_relu_ = on; }
  bool tracking_relu() const { return track_relu_; }
  const std::vector<std::uint8_t>& relu_log() const { return relu_log_; }
  std::vector<std::uint8_t>& relu_log() { return relu_log_; }

  // Op-building interface.
  Var push(Matrix value, bool needs_grad, Backward backward);
  /// Gradient buffer of node `id`, allocated as zeros on first use.
  Matrix& grad(int id);
  const Matrix& out_grad(int self) { return grad(self); }

 private:
  struct Node {
    Matrix value;
    const Matrix* ref = nullptr;
    Matrix grad;
    bool needs_grad = false;
    std::size_t param = static_cast<std::size_t>(-1);
    Backward backward;
  };

  bool record_;
  bool track_relu_ = false;
  std::deque<Node> nodes_;
  std::vector<std::uint8_t> relu_log_;
};

// Elementary ops. Shapes are checked; mismatches throw std::invalid_argument.

Var matmul(Tape& t, Var a, Var b);
/// x + b with b a 1 x cols row broadcast over rows.
Var add_row_bias(Tape& t, Var x, Var b);
/// x W + b.
Var affine(Tape& t, Var x, Var w, Var b);
Var add(Tape& t, Var a, Var b);
Var scale(Tape& t, Var x, double s);
Var relu(Tape& t, Var x);
Var concat_cols(Tape& t, std::span<const Var> parts);
Var gather_rows(Tape& t, Var x, std::vector<int> rows);
/// out(r, 0) = x(r, cols[r]).
Var pick_cols(Tape& t, Var x, std::vector<int> cols);
Var sum(Tape& t, Var x);
Var mean(Tape& t, Var x);

/// Row softmax over entries where mask != 0. Masked entries are 0 and a fully
/// masked row is all zeros.
Var softmax_rows(Tape& t, Var x, const Matrix& mask);

/// mean_i w_i (y_i - pred_i)^2 for an n x 1 prediction.
Var weighted_mse(Tape& t, Var pred, std::span<const double> targets,
                 std::span<const double> weights);

// Block-diagonal ops for a batch of `blocks` graphs padded to `n` nodes each.
// Row g*n + i belongs to node i of graph g.

/// out(g*n+i, j) = s * <q(g*n+i, off:off+w), k(g*n+j, off:off+w)>.
Var block_scores(Tape& t, Var q, Var k, int blocks, int n, int off, int w, double s);
/// x + coeff(0, c) * d, with coeff a learned row and d a constant of x's shape.
Var add_scaled_const(Tape& t, Var x, Var coeff, int c, const Matrix& d);
/// out(g*n+i, :) = sum_j alpha(g*n+i, j) * v(g*n+j, off:off+w).
Var block_attend(Tape& t, Var alpha, Var v, int blocks, int n, int off, int w);

}  // namespace swarm::ad

#pragma once

#include <cstdint>
#include <vector>

#include "gradcaps/tensor.hpp"

namespace gradcaps {

// Handle into a Tape; valid only for the tape that produced it.
struct Var {
  int idx = -1;
  bool valid() const { return idx >= 0; }
};

// Reverse-mode tape over Tensor2 primitives. One forward recording admits
// exactly one backward pass; calling backward twice is an error.
//
// Gradients follow subgradient conventions at the non-smooth points:
// sqrt'(0) = 0, abs'(0) = 0, relu'(0) = 0. This keeps the L2-norm losses
// well-defined at a zero numerator.
class Tape {
 public:
  // Leaf without gradient tracking (inputs, targets, noise draws).
  Var leaf(Tensor2 value);
  // Leaf with gradient tracking (network parameters under optimization).
  Var param(Tensor2 value);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  // a[m,n] + row[1,n], broadcast over rows.
  Var add_rowvec(Var a, Var row);
  // a[m,n] * row[1,n], broadcast over rows.
  Var mul_rowvec(Var a, Var row);
  Var scale(Var a, double s);
  Var add_scalar(Var a, double s);
  Var neg(Var a) { return scale(a, -1.0); }

  Var relu(Var a);
  Var tanh(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var abs(Var a);
  Var sqrt(Var a);
  Var square(Var a);
  Var recip(Var a);
  Var clamp(Var a, double lo, double hi);
  // Elementwise minimum; gradient routed to the smaller input (ties to a).
  Var min_elem(Var a, Var b);

  Var sum_all(Var a);   // -> [1,1]
  Var mean_all(Var a);  // -> [1,1]
  Var sum_cols(Var a);  // [m,n] -> [m,1]
  Var concat_cols(Var a, Var b);
  Var slice_cols(Var a, int from, int to);  // half-open column range

  const Tensor2& value(Var v) const;
  // Gradient of the backward root w.r.t. v; valid after backward, zero
  // tensors for nodes the root does not depend on.
  const Tensor2& grad(Var v) const;

  // Backward from a [1,1] root with seed 1.
  void backward(Var root);
  // Backward with an explicit seed of the root's shape.
  void backward(Var root, const Tensor2& seed);

  size_t size() const { return nodes_.size(); }

 private:
  enum class Op : uint8_t {
    Leaf, MatMul, Add, Sub, Mul, Div, AddRow, MulRow, Scale, AddScalar,
    Relu, Tanh, Exp, Log, Abs, Sqrt, Square, Recip, Clamp, MinElem,
    SumAll, MeanAll, SumCols, ConcatCols, SliceCols,
  };
  struct Node {
    Op op = Op::Leaf;
    int a = -1, b = -1;
    double s0 = 0.0, s1 = 0.0;
    Tensor2 value;
    Tensor2 grad;
    bool requires_grad = false;
  };

  Var push(Op op, int a, int b, Tensor2 value, double s0 = 0.0, double s1 = 0.0);
  const Node& node(Var v) const;
  Var unary(Op op, Var a, double s0 = 0.0, double s1 = 0.0);
  Var binary(Op op, Var a, Var b);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace gradcaps

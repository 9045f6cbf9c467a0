#include "gradcaps/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace gradcaps {

namespace {

void check_same_shape(const Tensor2& a, const Tensor2& b, const char* op) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

}  // namespace

Var Tape::push(Op op, int a, int b, Tensor2 value, double s0, double s1) {
  Node n;
  n.op = op;
  n.a = a;
  n.b = b;
  n.s0 = s0;
  n.s1 = s1;
  n.value = std::move(value);
  n.requires_grad = (a >= 0 && nodes_[a].requires_grad) ||
                    (b >= 0 && nodes_[b].requires_grad);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.idx >= static_cast<int>(nodes_.size()))
    throw std::invalid_argument("Tape: invalid Var");
  return nodes_[v.idx];
}

Var Tape::leaf(Tensor2 value) { return push(Op::Leaf, -1, -1, std::move(value)); }

Var Tape::param(Tensor2 value) {
  Var v = push(Op::Leaf, -1, -1, std::move(value));
  nodes_[v.idx].requires_grad = true;
  return v;
}

Var Tape::matmul(Var a, Var b) {
  return push(Op::MatMul, a.idx, b.idx, gradcaps::matmul(node(a).value, node(b).value));
}

Var Tape::binary(Op op, Var a, Var b) {
  const Tensor2& va = node(a).value;
  const Tensor2& vb = node(b).value;
  check_same_shape(va, vb, "tape binary op");
  Tensor2 out(va.rows(), va.cols());
  const size_t n = va.size();
  const double* pa = va.data();
  const double* pb = vb.data();
  double* po = out.data();
  switch (op) {
    case Op::Add: for (size_t i = 0; i < n; ++i) po[i] = pa[i] + pb[i]; break;
    case Op::Sub: for (size_t i = 0; i < n; ++i) po[i] = pa[i] - pb[i]; break;
    case Op::Mul: for (size_t i = 0; i < n; ++i) po[i] = pa[i] * pb[i]; break;
    case Op::Div: for (size_t i = 0; i < n; ++i) po[i] = pa[i] / pb[i]; break;
    case Op::MinElem: for (size_t i = 0; i < n; ++i) po[i] = pa[i] <= pb[i] ? pa[i] : pb[i]; break;
    default: throw std::logic_error("binary: bad op");
  }
  return push(op, a.idx, b.idx, std::move(out));
}

Var Tape::add(Var a, Var b) { return binary(Op::Add, a, b); }
Var Tape::sub(Var a, Var b) { return binary(Op::Sub, a, b); }
Var Tape::mul(Var a, Var b) { return binary(Op::Mul, a, b); }
Var Tape::div(Var a, Var b) { return binary(Op::Div, a, b); }
Var Tape::min_elem(Var a, Var b) { return binary(Op::MinElem, a, b); }

Var Tape::add_rowvec(Var a, Var row) {
  const Tensor2& va = node(a).value;
  const Tensor2& vr = node(row).value;
  if (vr.rows() != 1 || vr.cols() != va.cols())
    throw std::invalid_argument("add_rowvec: shape mismatch");
  Tensor2 out(va.rows(), va.cols());
  for (int i = 0; i < va.rows(); ++i)
    for (int j = 0; j < va.cols(); ++j) out.at(i, j) = va.at(i, j) + vr.at(0, j);
  return push(Op::AddRow, a.idx, row.idx, std::move(out));
}

Var Tape::mul_rowvec(Var a, Var row) {
  const Tensor2& va = node(a).value;
  const Tensor2& vr = node(row).value;
  if (vr.rows() != 1 || vr.cols() != va.cols())
    throw std::invalid_argument("mul_rowvec: shape mismatch");
  Tensor2 out(va.rows(), va.cols());
  for (int i = 0; i < va.rows(); ++i)
    for (int j = 0; j < va.cols(); ++j) out.at(i, j) = va.at(i, j) * vr.at(0, j);
  return push(Op::MulRow, a.idx, row.idx, std::move(out));
}

Var Tape::unary(Op op, Var a, double s0, double s1) {
  const Tensor2& va = node(a).value;
  Tensor2 out(va.rows(), va.cols());
  const size_t n = va.size();
  const double* p = va.data();
  double* po = out.data();
  switch (op) {
    case Op::Scale: for (size_t i = 0; i < n; ++i) po[i] = p[i] * s0; break;
    case Op::AddScalar: for (size_t i = 0; i < n; ++i) po[i] = p[i] + s0; break;
    case Op::Relu: for (size_t i = 0; i < n; ++i) po[i] = p[i] > 0.0 ? p[i] : 0.0; break;
    case Op::Tanh: for (size_t i = 0; i < n; ++i) po[i] = std::tanh(p[i]); break;
    case Op::Exp: for (size_t i = 0; i < n; ++i) po[i] = std::exp(p[i]); break;
    case Op::Log: for (size_t i = 0; i < n; ++i) po[i] = std::log(p[i]); break;
    case Op::Abs: for (size_t i = 0; i < n; ++i) po[i] = std::fabs(p[i]); break;
    case Op::Sqrt: for (size_t i = 0; i < n; ++i) po[i] = std::sqrt(p[i]); break;
    case Op::Square: for (size_t i = 0; i < n; ++i) po[i] = p[i] * p[i]; break;
    case Op::Recip: for (size_t i = 0; i < n; ++i) po[i] = 1.0 / p[i]; break;
    case Op::Clamp:
      for (size_t i = 0; i < n; ++i) po[i] = p[i] < s0 ? s0 : (p[i] > s1 ? s1 : p[i]);
      break;
    default: throw std::logic_error("unary: bad op");
  }
  return push(op, a.idx, -1, std::move(out), s0, s1);
}

Var Tape::scale(Var a, double s) { return unary(Op::Scale, a, s); }
Var Tape::add_scalar(Var a, double s) { return unary(Op::AddScalar, a, s); }
Var Tape::relu(Var a) { return unary(Op::Relu, a); }
Var Tape::tanh(Var a) { return unary(Op::Tanh, a); }
Var Tape::exp(Var a) { return unary(Op::Exp, a); }
Var Tape::log(Var a) { return unary(Op::Log, a); }
Var Tape::abs(Var a) { return unary(Op::Abs, a); }
Var Tape::sqrt(Var a) { return unary(Op::Sqrt, a); }
Var Tape::square(Var a) { return unary(Op::Square, a); }
Var Tape::recip(Var a) { return unary(Op::Recip, a); }

Var Tape::clamp(Var a, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("clamp: lo > hi");
  return unary(Op::Clamp, a, lo, hi);
}

Var Tape::sum_all(Var a) {
  const Tensor2& va = node(a).value;
  double acc = 0.0;
  for (double v : va.raw()) acc += v;
  Tensor2 out(1, 1);
  out.at(0, 0) = acc;
  return push(Op::SumAll, a.idx, -1, std::move(out));
}

Var Tape::mean_all(Var a) {
  const Tensor2& va = node(a).value;
  if (va.size() == 0) throw std::invalid_argument("mean_all: empty tensor");
  double acc = 0.0;
  for (double v : va.raw()) acc += v;
  Tensor2 out(1, 1);
  out.at(0, 0) = acc / static_cast<double>(va.size());
  return push(Op::MeanAll, a.idx, -1, std::move(out));
}

Var Tape::sum_cols(Var a) {
  const Tensor2& va = node(a).value;
  Tensor2 out(va.rows(), 1);
  for (int i = 0; i < va.rows(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < va.cols(); ++j) acc += va.at(i, j);
    out.at(i, 0) = acc;
  }
  return push(Op::SumCols, a.idx, -1, std::move(out));
}

Var Tape::concat_cols(Var a, Var b) {
  const Tensor2& va = node(a).value;
  const Tensor2& vb = node(b).value;
  if (va.rows() != vb.rows())
    throw std::invalid_argument("concat_cols: row mismatch");
  Tensor2 out(va.rows(), va.cols() + vb.cols());
  for (int i = 0; i < va.rows(); ++i) {
    for (int j = 0; j < va.cols(); ++j) out.at(i, j) = va.at(i, j);
    for (int j = 0; j < vb.cols(); ++j) out.at(i, va.cols() + j) = vb.at(i, j);
  }
  return push(Op::ConcatCols, a.idx, b.idx, std::move(out));
}

Var Tape::slice_cols(Var a, int from, int to) {
  const Tensor2& va = node(a).value;
  if (from < 0 || to > va.cols() || from >= to)
    throw std::invalid_argument("slice_cols: bad range");
  Tensor2 out(va.rows(), to - from);
  for (int i = 0; i < va.rows(); ++i)
    for (int j = from; j < to; ++j) out.at(i, j - from) = va.at(i, j);
  return push(Op::SliceCols, a.idx, -1, std::move(out), from, to);
}

const Tensor2& Tape::value(Var v) const { return node(v).value; }

const Tensor2& Tape::grad(Var v) const {
  if (!backward_done_) throw std::logic_error("Tape::grad before backward");
  return node(v).grad;
}

void Tape::backward(Var root) {
  Tensor2 seed(1, 1);
  if (node(root).value.rows() != 1 || node(root).value.cols() != 1)
    throw std::invalid_argument("backward: scalar seed requires [1,1] root");
  seed.at(0, 0) = 1.0;
  backward(root, seed);
}

void Tape::backward(Var root, const Tensor2& seed) {
  if (backward_done_) throw std::logic_error("Tape::backward called twice");
  backward_done_ = true;
  const Node& rn = node(root);
  check_same_shape(rn.value, seed, "backward seed");

  for (auto& n : nodes_)
    n.grad = Tensor2(n.value.rows(), n.value.cols());
  nodes_[root.idx].grad = seed;

  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.requires_grad && n.op != Op::Leaf) continue;
    const Tensor2& g = n.grad;
    Node* na = n.a >= 0 ? &nodes_[n.a] : nullptr;
    Node* nb = n.b >= 0 ? &nodes_[n.b] : nullptr;
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::MatMul:
        // dA += G * B^T ; dB += A^T * G
        if (na->requires_grad) matmul_a_bt_acc(g, nb->value, na->grad);
        if (nb->requires_grad) matmul_at_b_acc(na->value, g, nb->grad);
        break;
      case Op::Add:
        if (na->requires_grad)
          for (size_t k = 0; k < g.size(); ++k) na->grad.raw()[k] += g.raw()[k];
        if (nb->requires_grad)
          for (size_t k = 0; k < g.size(); ++k) nb->grad.raw()[k] += g.raw()[k];
        break;
      case Op::Sub:
        if (na->requires_grad)
          for (size_t k = 0; k < g.size(); ++k) na->grad.raw()[k] += g.raw()[k];
        if (nb->requires_grad)
          for (size_t k = 0; k < g.size(); ++k) nb->grad.raw()[k] -= g.raw()[k];
        break;
      case Op::Mul:
        if (na->requires_grad)
          for (size_t k = 0; k < g.size(); ++k)
            na->grad.raw()[k] += g.raw()[k] * nb->value.raw()[k];
        if (nb->requires_grad)
          for (size_t k = 0; k < g.size(); ++k)
            nb->grad.raw()[k] += g.raw()[k] * na->value.raw()[k];
        break;
      case Op::Div:
        // c = a/b: dA += G/b, dB -= G*c/b
        if (na->requires_grad)
          for (size_t k = 0; k < g.size(); ++k)
            na->grad.raw()[k] += g.raw()[k] / nb->value.raw()[k];
        if (nb->requires_grad)
          for (size_t k = 0; k < g.size(); ++k)
            nb->grad.raw()[k] -= g.raw()[k] * n.value.raw()[k] / nb->value.raw()[k];
        break;
      case Op::MinElem:
        for (size_t k = 0; k < g.size(); ++k) {
          if (na->value.raw()[k] <= nb->value.raw()[k]) {
            if (na->requires_grad) na->grad.raw()[k] += g.raw()[k];
          } else if (nb->requires_grad) {
            nb->grad.raw()[k] += g.raw()[k];
          }
        }
        break;
      case Op::AddRow:
        if (na->requires_grad)
          for (size_t k = 0; k < g.size(); ++k) na->grad.raw()[k] += g.raw()[k];
        if (nb->requires_grad)
          for (int r = 0; r < g.rows(); ++r)
            for (int c = 0; c < g.cols(); ++c) nb->grad.at(0, c) += g.at(r, c);
        break;
      case Op::MulRow:
        if (na->requires_grad)
          for (int r = 0; r < g.rows(); ++r)
            for (int c = 0; c < g.cols(); ++c)
              na->grad.at(r, c) += g.at(r, c) * nb->value.at(0, c);
        if (nb->requires_grad)
          for (int r = 0; r < g.rows(); ++r)
            for (int c = 0; c < g.cols(); ++c)
              nb->grad.at(0, c) += g.at(r, c) * na->value.at(r, c);
        break;
      case Op::Scale:
        if (na->requires_grad)
          for (size_t k = 0; k < g.size(); ++k) na->grad.raw()[k] += g.raw()[k] * n.s0;
        break;
      case Op::AddScalar:
        if (na->requires_grad)
          for (size_t k = 0; k < g.size(); ++k) na->grad.raw()[k] += g.raw()[k];
        break;
      case Op::Relu:
        if (na->requires_grad)
          for (size_t k = 0; k < g.size(); ++k)
            if (na->value.raw()[k] > 0.0) na->grad.raw()[k] += g.raw()[k];
        break;
      case Op::Tanh:
        if (na->requires_grad)
          for (size_t k = 0; k < g.size(); ++k) {
            const double y = n.value.raw()[k];
            na->grad.raw()[k] += g.raw()[k] * (1.0 - y * y);
          }
        break;
      case Op::Exp:
        if (na->requires_grad)
          for (size_t k = 0; k < g.size(); ++k)
            na->grad.raw()[k] += g.raw()[k] * n.value.raw()[k];
        break;
      case Op::Log:
        if (na->requires_grad)
          for (size_t k = 0; k < g.size(); ++k)
            na->grad.raw()[k] += g.raw()[k] / na->value.raw()[k];
        break;
      case Op::Abs:
        if (na->requires_grad)
          for (size_t k = 0; k < g.size(); ++k) {
            const double x = na->value.raw()[k];
            if (x > 0.0) na->grad.raw()[k] += g.raw()[k];
            else if (x < 0.0) na->grad.raw()[k] -= g.raw()[k];
          }
        break;
      case Op::Sqrt:
        if (na->requires_grad)
          for (size_t k = 0; k < g.size(); ++k) {
            const double y = n.value.raw()[k];
            if (y > 0.0) na->grad.raw()[k] += g.raw()[k] * 0.5 / y;
          }
        break;
      case Op::Square:
        if (na->requires_grad)
          for (size_t k = 0; k < g.size(); ++k)
            na->grad.raw()[k] += g.raw()[k] * 2.0 * na->value.raw()[k];
        break;
      case Op::Recip:
        if (na->requires_grad)
          for (size_t k = 0; k < g.size(); ++k) {
            const double y = n.value.raw()[k];
            na->grad.raw()[k] -= g.raw()[k] * y * y;
          }
        break;
      case Op::Clamp:
        if (na->requires_grad)
          for (size_t k = 0; k < g.size(); ++k) {
            const double x = na->value.raw()[k];
            if (x >= n.s0 && x <= n.s1) na->grad.raw()[k] += g.raw()[k];
          }
        break;
      case Op::SumAll:
        if (na->requires_grad) {
          const double s = g.at(0, 0);
          for (auto& v : na->grad.raw()) v += s;
        }
        break;
      case Op::MeanAll:
        if (na->requires_grad) {
          const double s = g.at(0, 0) / static_cast<double>(na->value.size());
          for (auto& v : na->grad.raw()) v += s;
        }
        break;
      case Op::SumCols:
        if (na->requires_grad)
          for (int r = 0; r < na->value.rows(); ++r)
            for (int c = 0; c < na->value.cols(); ++c)
              na->grad.at(r, c) += g.at(r, 0);
        break;
      case Op::ConcatCols:
        if (na->requires_grad)
          for (int r = 0; r < na->value.rows(); ++r)
            for (int c = 0; c < na->value.cols(); ++c)
              na->grad.at(r, c) += g.at(r, c);
        if (nb->requires_grad)
          for (int r = 0; r < nb->value.rows(); ++r)
            for (int c = 0; c < nb->value.cols(); ++c)
              nb->grad.at(r, c) += g.at(r, na->value.cols() + c);
        break;
      case Op::SliceCols:
        if (na->requires_grad) {
          const int from = static_cast<int>(n.s0);
          for (int r = 0; r < g.rows(); ++r)
            for (int c = 0; c < g.cols(); ++c)
              na->grad.at(r, from + c) += g.at(r, c);
        }
        break;
    }
  }
}

}  // namespace gradcaps

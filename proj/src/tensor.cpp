#include "gradcaps/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gradcaps/errors.hpp"

namespace gradcaps {

Tensor2::Tensor2(int rows, int cols)
    : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0.0) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("Tensor2: negative shape");
}

Tensor2 Tensor2::full(int rows, int cols, double v) {
  Tensor2 t(rows, cols);
  t.fill(v);
  return t;
}

Tensor2 Tensor2::from(std::initializer_list<std::initializer_list<double>> rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r > 0 ? static_cast<int>(rows.begin()->size()) : 0;
  Tensor2 t(r, c);
  int i = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c)
      throw std::invalid_argument("Tensor2::from: ragged rows");
    int j = 0;
    for (double v : row) t.at(i, j++) = v;
    ++i;
  }
  return t;
}

Tensor2 Tensor2::row(std::initializer_list<double> values) {
  Tensor2 t(1, static_cast<int>(values.size()));
  int j = 0;
  for (double v : values) t.at(0, j++) = v;
  return t;
}

Tensor2 Tensor2::uniform(int rows, int cols, double lo, double hi, Rng& rng) {
  Tensor2 t(rows, cols);
  for (auto& v : t.raw()) v = rng.uniform(lo, hi);
  return t;
}

void Tensor2::fill(double v) {
  for (auto& x : data_) x = v;
}

bool Tensor2::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void Tensor2::ensure_finite(const char* what) const {
  if (!all_finite())
    throw RuntimeAbort(std::string("non-finite values in ") + what);
}

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
  Tensor2 c(a.rows(), b.cols());
  matmul_acc(a, b, c);
  return c;
}

void matmul_acc(const Tensor2& a, const Tensor2& b, Tensor2& c) {
  if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols())
    throw std::invalid_argument("matmul: shape mismatch");
  const int m = a.rows(), k = a.cols(), n = b.cols();
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  for (int i = 0; i < m; ++i) {
    const double* arow = pa + static_cast<size_t>(i) * k;
    double* crow = pc + static_cast<size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = pb + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_at_b_acc(const Tensor2& a, const Tensor2& b, Tensor2& c) {
  if (a.rows() != b.rows() || c.rows() != a.cols() || c.cols() != b.cols())
    throw std::invalid_argument("matmul_at_b: shape mismatch");
  const int m = a.rows(), k = a.cols(), n = b.cols();
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  for (int i = 0; i < m; ++i) {
    const double* arow = pa + static_cast<size_t>(i) * k;
    const double* brow = pb + static_cast<size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      double* crow = pc + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_a_bt_acc(const Tensor2& a, const Tensor2& b, Tensor2& c) {
  if (a.cols() != b.cols() || c.rows() != a.rows() || c.cols() != b.rows())
    throw std::invalid_argument("matmul_a_bt: shape mismatch");
  const int m = a.rows(), k = a.cols(), n = b.rows();
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  for (int i = 0; i < m; ++i) {
    const double* arow = pa + static_cast<size_t>(i) * k;
    double* crow = pc + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* brow = pb + static_cast<size_t>(j) * k;
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

}  // namespace gradcaps

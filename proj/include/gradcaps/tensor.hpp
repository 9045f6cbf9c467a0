#pragma once

#include <initializer_list>
#include <vector>

#include "gradcaps/rng.hpp"

namespace gradcaps {

// Dense row-major matrix of doubles. Rows usually index batch entries.
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(int rows, int cols);

  static Tensor2 zeros(int rows, int cols) { return Tensor2(rows, cols); }
  static Tensor2 full(int rows, int cols, double v);
  static Tensor2 from(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor2 row(std::initializer_list<double> values);
  static Tensor2 uniform(int rows, int cols, double lo, double hi, Rng& rng);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }

  double& at(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double at(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  bool same_shape(const Tensor2& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  void fill(double v);
  bool all_finite() const;
  // Throws RuntimeAbort naming `what` if any entry is NaN or Inf.
  void ensure_finite(const char* what) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// C = A * B. Shapes must conform.
Tensor2 matmul(const Tensor2& a, const Tensor2& b);
// C += A * B.
void matmul_acc(const Tensor2& a, const Tensor2& b, Tensor2& c);
// C += A^T * B.
void matmul_at_b_acc(const Tensor2& a, const Tensor2& b, Tensor2& c);
// C += A * B^T.
void matmul_a_bt_acc(const Tensor2& a, const Tensor2& b, Tensor2& c);

}  // namespace gradcaps

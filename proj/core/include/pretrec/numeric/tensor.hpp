#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace pretrec {

// Dense row-major matrix of 64-bit reals. Vectors are n x 1 or 1 x n.
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor2(std::size_t rows, std::size_t cols, std::vector<double> values);

  // Row-major literal: Tensor2::from_rows({{1, 2}, {3, 4}}).
  static Tensor2 from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor2 identity(std::size_t n);
  static Tensor2 column(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool same_shape(const Tensor2& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }
  const double& operator()(std::size_t r, std::size_t c) const noexcept {
    return values_[r * cols_ + c];
  }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  const double& operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<double> row(std::size_t r) noexcept { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  void fill(double v);
  bool all_finite() const noexcept;
  Tensor2 transposed() const;

  friend bool operator==(const Tensor2&, const Tensor2&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// C = A * B.
Tensor2 matmul(const Tensor2& a, const Tensor2& b);
// C += A^T * B, C = A * B^T variants used by the backward passes.
void matmul_at_b_accumulate(const Tensor2& a, const Tensor2& b, Tensor2& out);
void matmul_a_bt_accumulate(const Tensor2& a, const Tensor2& b, Tensor2& out);

double max_abs_diff(const Tensor2& a, const Tensor2& b);
double squared_norm(const Tensor2& a) noexcept;

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

// Compressed sparse row matrix. Duplicate coordinates are summed on construction.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);

  static SparseMatrix identity(std::size_t n);
  static SparseMatrix from_dense(const Tensor2& dense);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_offsets() const noexcept { return offsets_; }
  std::span<const std::size_t> col_indices() const noexcept { return columns_; }
  std::span<const double> values() const noexcept { return values_; }

  double at(std::size_t r, std::size_t c) const noexcept;
  Tensor2 to_dense() const;
  SparseMatrix transposed() const;

  // y = S * x.
  Tensor2 multiply(const Tensor2& x) const;
  // out += S^T * y.
  void multiply_transposed_accumulate(const Tensor2& y, Tensor2& out) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> columns_;
  std::vector<double> values_;
};

}  // namespace pretrec

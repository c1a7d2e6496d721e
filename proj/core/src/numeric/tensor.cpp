#include "pretrec/numeric/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pretrec/error.hpp"

namespace pretrec {

namespace {

std::string shape_str(const Tensor2& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

}  // namespace

Tensor2::Tensor2(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Tensor2::Tensor2(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ConfigError("Tensor2: " + std::to_string(values_.size()) + " values for shape " +
                      std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Tensor2 Tensor2::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ConfigError("Tensor2::from_rows: ragged rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor2(r, c, std::move(values));
}

Tensor2 Tensor2::identity(std::size_t n) {
  Tensor2 t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

Tensor2 Tensor2::column(std::span<const double> values) {
  return Tensor2(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

void Tensor2::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool Tensor2::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Tensor2 Tensor2::transposed() const {
  Tensor2 t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
  if (a.cols() != b.rows()) {
    throw ConfigError("matmul: shape mismatch " + shape_str(a) + " * " + shape_str(b));
  }
  Tensor2 out(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* dst = &out(i, 0);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* src = &b(k, 0);
      for (std::size_t j = 0; j < n; ++j) dst[j] += aik * src[j];
    }
  }
  return out;
}

void matmul_at_b_accumulate(const Tensor2& a, const Tensor2& b, Tensor2& out) {
  if (a.rows() != b.rows() || out.rows() != a.cols() || out.cols() != b.cols()) {
    throw ConfigError("matmul_at_b: shape mismatch");
  }
  const std::size_t n = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* brow = &b(k, 0);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      double* dst = &out(i, 0);
      for (std::size_t j = 0; j < n; ++j) dst[j] += aki * brow[j];
    }
  }
}

void matmul_a_bt_accumulate(const Tensor2& a, const Tensor2& b, Tensor2& out) {
  if (a.cols() != b.cols() || out.rows() != a.rows() || out.cols() != b.rows()) {
    throw ConfigError("matmul_a_bt: shape mismatch");
  }
  const std::size_t inner = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* arow = &a(i, 0);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* brow = &b(j, 0);
      double acc = 0.0;
      for (std::size_t k = 0; k < inner; ++k) acc += arow[k] * brow[k];
      out(i, j) += acc;
    }
  }
}

double max_abs_diff(const Tensor2& a, const Tensor2& b) {
  if (!a.same_shape(b)) throw ConfigError("max_abs_diff: shape mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

double squared_norm(const Tensor2& a) noexcept {
  double acc = 0.0;
  for (double v : a.values()) acc += v * v;
  return acc;
}

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets)
    : rows_(rows), cols_(cols) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) throw ConfigError("SparseMatrix: triplet out of range");
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& x, const Triplet& y) {
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  });
  offsets_.assign(rows + 1, 0);
  for (std::size_t i = 0; i < triplets.size();) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < triplets.size() && triplets[j].row == triplets[i].row &&
           triplets[j].col == triplets[i].col) {
      sum += triplets[j].value;
      ++j;
    }
    columns_.push_back(triplets[i].col);
    values_.push_back(sum);
    ++offsets_[triplets[i].row + 1];
    i = j;
  }
  for (std::size_t r = 0; r < rows; ++r) offsets_[r + 1] += offsets_[r];
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return SparseMatrix(n, n, std::move(t));
}

SparseMatrix SparseMatrix::from_dense(const Tensor2& dense) {
  std::vector<Triplet> t;
  for (std::size_t r = 0; r < dense.rows(); ++r)
    for (std::size_t c = 0; c < dense.cols(); ++c)
      if (dense(r, c) != 0.0) t.push_back({r, c, dense(r, c)});
  return SparseMatrix(dense.rows(), dense.cols(), std::move(t));
}

double SparseMatrix::at(std::size_t r, std::size_t c) const noexcept {
  const auto first = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[r]);
  const auto last = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[r + 1]);
  const auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return 0.0;
  return values_[static_cast<std::size_t>(it - columns_.begin())];
}

Tensor2 SparseMatrix::to_dense() const {
  Tensor2 out(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t p = offsets_[r]; p < offsets_[r + 1]; ++p) out(r, columns_[p]) = values_[p];
  return out;
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t p = offsets_[r]; p < offsets_[r + 1]; ++p)
      t.push_back({columns_[p], r, values_[p]});
  return SparseMatrix(cols_, rows_, std::move(t));
}

Tensor2 SparseMatrix::multiply(const Tensor2& x) const {
  if (x.rows() != cols_) {
    throw ConfigError("sparse multiply: " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                      " * " + shape_str(x));
  }
  Tensor2 out(rows_, x.cols());
  const std::size_t n = x.cols();
  for (std::size_t r = 0; r < rows_; ++r) {
    double* dst = &out(r, 0);
    for (std::size_t p = offsets_[r]; p < offsets_[r + 1]; ++p) {
      const double v = values_[p];
      const double* src = &x(columns_[p], 0);
      for (std::size_t j = 0; j < n; ++j) dst[j] += v * src[j];
    }
  }
  return out;
}

void SparseMatrix::multiply_transposed_accumulate(const Tensor2& y, Tensor2& out) const {
  if (y.rows() != rows_ || out.rows() != cols_ || out.cols() != y.cols()) {
    throw ConfigError("sparse transposed multiply: shape mismatch");
  }
  const std::size_t n = y.cols();
  for (std::size_t r = 0; r < rows_; ++r) {
    const double* src = &y(r, 0);
    for (std::size_t p = offsets_[r]; p < offsets_[r + 1]; ++p) {
      const double v = values_[p];
      double* dst = &out(columns_[p], 0);
      for (std::size_t j = 0; j < n; ++j) dst[j] += v * src[j];
    }
  }
}

}  // namespace pretrec

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace dpgnn {

/// Dense row-major matrix of doubles. Carrier for features, adjacency
/// powers, activations and parameters.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  /// Literal construction, mainly for tests: Matrix::from_rows({{1, 2}, {3, 4}}).
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  bool same_shape(const Matrix& other) const noexcept { return rows_ == other.rows_ && cols_ == other.cols_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Products. All route their inner loops through simd::axpy / simd::dot.

/// A * B, accumulated row by row (axpy over columns of B). Zero entries of A
/// are skipped, which makes products with sparse left factors cheap.
Matrix matmul(const Matrix& a, const Matrix& b);
/// A^T * B without materializing A^T.
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
/// A * B^T as row-by-row dot products; preferred when the shared dimension is long.
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

Matrix& add_in_place(Matrix& a, const Matrix& b);
Matrix& add_scaled_in_place(Matrix& a, double alpha, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scaled(const Matrix& a, double alpha);

double max_abs_diff(const Matrix& a, const Matrix& b);
bool all_finite(const Matrix& a);
bool is_symmetric(const Matrix& a, double tol);

}  // namespace dpgnn

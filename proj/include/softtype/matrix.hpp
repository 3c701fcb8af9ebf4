#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace softtype {

// Dense row-major matrix of doubles. Rows index identifiers, columns index types.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Row-stochastic matrix: entries in [0,1], rows summing to one.
// The constructor validates; the tolerances are configurable for ingesting
// externally produced matrices.
class ProbabilityMatrix {
public:
  static constexpr double kEntryTolerance = 1e-12;
  static constexpr double kRowSumTolerance = 1e-9;

  ProbabilityMatrix() = default;
  explicit ProbabilityMatrix(Matrix values, double row_sum_tolerance = kRowSumTolerance);

  std::size_t rows() const noexcept { return values_.rows(); }
  std::size_t cols() const noexcept { return values_.cols(); }
  double operator()(std::size_t v, std::size_t t) const { return values_(v, t); }
  std::span<const double> row(std::size_t v) const { return values_.row(v); }
  const Matrix& values() const noexcept { return values_; }

  friend bool operator==(const ProbabilityMatrix&, const ProbabilityMatrix&) = default;

private:
  Matrix values_;
};

// Componentwise log of a probability matrix; entries in [-inf, 0].
class LogProbMatrix {
public:
  static constexpr double kRowSumTolerance = 1e-9;

  LogProbMatrix() = default;
  explicit LogProbMatrix(Matrix values);

  static LogProbMatrix fromProbabilities(const ProbabilityMatrix& p);

  std::size_t rows() const noexcept { return values_.rows(); }
  std::size_t cols() const noexcept { return values_.cols(); }
  double operator()(std::size_t v, std::size_t t) const { return values_(v, t); }
  const Matrix& values() const noexcept { return values_; }

private:
  Matrix values_;
};

}  // namespace softtype

namespace softtype {

// Learned per-identifier type distributions. Row v is the natural constraint
// for identifier v.
class NaturalConstraintMatrix {
public:
  static constexpr double kRowSumTolerance = 1e-6;

  NaturalConstraintMatrix() = default;
  explicit NaturalConstraintMatrix(Matrix values);

  std::size_t rows() const noexcept { return values_.rows(); }
  std::size_t cols() const noexcept { return values_.cols(); }
  double operator()(std::size_t v, std::size_t t) const { return values_(v, t); }
  std::span<const double> row(std::size_t v) const { return values_.row(v); }
  const Matrix& values() const noexcept { return values_; }

  friend bool operator==(const NaturalConstraintMatrix&, const NaturalConstraintMatrix&) = default;

private:
  Matrix values_;
};

}  // namespace softtype

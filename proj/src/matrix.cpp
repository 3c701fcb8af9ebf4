#include "softtype/matrix.hpp"

#include <cmath>
#include <string>

#include "softtype/error.hpp"

namespace softtype {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionMismatch("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

ProbabilityMatrix::ProbabilityMatrix(Matrix values, double row_sum_tolerance) : values_(std::move(values)) {
  for (std::size_t v = 0; v < values_.rows(); ++v) {
    double sum = 0.0;
    for (double x : values_.row(v)) {
      if (!(x >= -kEntryTolerance && x <= 1.0 + kEntryTolerance)) {
        throw DomainError("probability entry out of [0,1] in row " + std::to_string(v));
      }
      sum += x;
    }
    if (std::abs(sum - 1.0) > row_sum_tolerance) {
      throw DomainError("row " + std::to_string(v) + " sums to " + std::to_string(sum));
    }
  }
}

LogProbMatrix::LogProbMatrix(Matrix values) : values_(std::move(values)) {
  for (std::size_t v = 0; v < values_.rows(); ++v) {
    double sum = 0.0;
    for (double x : values_.row(v)) {
      if (std::isnan(x) || x > 0.0) {
        throw DomainError("log-probability entry above 0 in row " + std::to_string(v));
      }
      sum += std::exp(x);
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw DomainError("exp of log-probability row " + std::to_string(v) + " sums to " + std::to_string(sum));
    }
  }
}

LogProbMatrix LogProbMatrix::fromProbabilities(const ProbabilityMatrix& p) {
  Matrix out(p.rows(), p.cols());
  for (std::size_t v = 0; v < p.rows(); ++v) {
    for (std::size_t t = 0; t < p.cols(); ++t) {
      // Entries within tolerance below zero are treated as zero.
      out(v, t) = p(v, t) <= 0.0 ? -INFINITY : std::log(std::min(p(v, t), 1.0));
    }
  }
  return LogProbMatrix(std::move(out));
}

}  // namespace softtype

namespace softtype {

NaturalConstraintMatrix::NaturalConstraintMatrix(Matrix values)
    : values_(ProbabilityMatrix(std::move(values), kRowSumTolerance).values()) {}

}  // namespace softtype

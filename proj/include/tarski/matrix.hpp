#pragma once

#include <cstddef>
#include <vector>

#include "tarski/rational.hpp"

namespace tarski {

/// Dense row-major matrix over the rationals. Sizes are desk scale (a few
/// hundred rows), so no sparsity tricks.
class RatMatrix {
 public:
  RatMatrix() = default;
  RatMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static RatMatrix identity(std::size_t n);
  static RatMatrix zero(std::size_t rows, std::size_t cols) { return RatMatrix(rows, cols); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Rational& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Rational& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  RatMatrix transpose() const;
  bool is_zero() const;

  friend RatMatrix operator*(const RatMatrix& a, const RatMatrix& b);
  friend RatMatrix operator+(const RatMatrix& a, const RatMatrix& b);
  friend RatMatrix operator-(const RatMatrix& a, const RatMatrix& b);
  friend RatMatrix operator*(const Rational& s, const RatMatrix& a);
  friend bool operator==(const RatMatrix& a, const RatMatrix& b);

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Rational> data_;
};

/// Reduced row echelon form in place; returns the pivot columns.
std::vector<std::size_t> row_reduce(RatMatrix& m);

std::size_t rank(RatMatrix m);

/// Basis of {x : m x = 0}, returned as the columns of the result.
RatMatrix nullspace(const RatMatrix& m);

/// Block diagonal sum.
RatMatrix direct_sum(const std::vector<RatMatrix>& blocks);

/// m*m == m and m is symmetric.
bool is_orthogonal_projection(const RatMatrix& m);

Rational trace(const RatMatrix& m);

}  // namespace tarski

#include "tarski/matrix.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace tarski {

RatMatrix RatMatrix::identity(std::size_t n) {
  RatMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

RatMatrix RatMatrix::transpose() const {
  RatMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

bool RatMatrix::is_zero() const {
  for (const auto& x : data_)
    if (sgn(x) != 0) return false;
  return true;
}

RatMatrix operator*(const RatMatrix& a, const RatMatrix& b) {
  if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product: inner dimensions differ");
  RatMatrix out(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i) {
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const Rational& aik = a(i, k);
      if (sgn(aik) == 0) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) {
        if (sgn(b(k, j)) != 0) out(i, j) += aik * b(k, j);
      }
    }
  }
  return out;
}

RatMatrix operator+(const RatMatrix& a, const RatMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw std::invalid_argument("matrix sum: shapes differ");
  RatMatrix out(a);
  for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] += b.data_[i];
  return out;
}

RatMatrix operator-(const RatMatrix& a, const RatMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw std::invalid_argument("matrix difference: shapes differ");
  RatMatrix out(a);
  for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] -= b.data_[i];
  return out;
}

RatMatrix operator*(const Rational& s, const RatMatrix& a) {
  RatMatrix out(a);
  for (auto& x : out.data_) x *= s;
  return out;
}

bool operator==(const RatMatrix& a, const RatMatrix& b) {
  return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
}

std::vector<std::size_t> row_reduce(RatMatrix& m) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
    std::size_t piv = row;
    while (piv < m.rows() && sgn(m(piv, col)) == 0) ++piv;
    if (piv == m.rows()) continue;
    if (piv != row)
      for (std::size_t c = 0; c < m.cols(); ++c) std::swap(m(piv, c), m(row, c));
    Rational inv = 1 / m(row, col);
    for (std::size_t c = col; c < m.cols(); ++c) m(row, c) *= inv;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (r == row || sgn(m(r, col)) == 0) continue;
      Rational f = m(r, col);
      for (std::size_t c = col; c < m.cols(); ++c) m(r, c) -= f * m(row, c);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

std::size_t rank(RatMatrix m) { return row_reduce(m).size(); }

RatMatrix nullspace(const RatMatrix& m) {
  RatMatrix r(m);
  auto pivots = row_reduce(r);
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto p : pivots) is_pivot[p] = true;
  std::vector<std::size_t> free_cols;
  for (std::size_t c = 0; c < m.cols(); ++c)
    if (!is_pivot[c]) free_cols.push_back(c);
  RatMatrix basis(m.cols(), free_cols.size());
  for (std::size_t k = 0; k < free_cols.size(); ++k) {
    std::size_t f = free_cols[k];
    basis(f, k) = 1;
    for (std::size_t i = 0; i < pivots.size(); ++i) basis(pivots[i], k) = -r(i, f);
  }
  return basis;
}

RatMatrix direct_sum(const std::vector<RatMatrix>& blocks) {
  std::size_t rows = 0, cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  RatMatrix out(rows, cols);
  std::size_t r0 = 0, c0 = 0;
  for (const auto& b : blocks) {
    for (std::size_t r = 0; r < b.rows(); ++r)
      for (std::size_t c = 0; c < b.cols(); ++c) out(r0 + r, c0 + c) = b(r, c);
    r0 += b.rows();
    c0 += b.cols();
  }
  return out;
}

bool is_orthogonal_projection(const RatMatrix& m) {
  return m.rows() == m.cols() && m * m == m && m.transpose() == m;
}

Rational trace(const RatMatrix& m) {
  Rational t = 0;
  for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i) t += m(i, i);
  return t;
}

}  // namespace tarski

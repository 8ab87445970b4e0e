#ifndef SUBIND_CHOLESKY_UPDATE_HPP
#define SUBIND_CHOLESKY_UPDATE_HPP

#include "subind/common.hpp"

#include <cmath>

namespace subind {

/// Lower Cholesky factor L L' = A of a principal submatrix that grows and
/// shrinks one row/column at a time.
///
/// Appending costs one triangular solve, removing position p costs a block
/// shift plus a rank-one update of the trailing block; both are O(size^2).
/// Storage is preallocated to `capacity` so neither operation reallocates.
template <typename Scalar>
class UpdatableCholesky {
 public:
  explicit UpdatableCholesky(Index capacity = 0) : L_(Matrix<Scalar>::Zero(capacity, capacity)) {}

  Index size() const { return size_; }
  Index capacity() const { return L_.rows(); }

  /// Borders A with `column` (entries against the current rows, in factor
  /// order) and `diagonal`.
  void append(const Vector<Scalar>& column, Scalar diagonal) {
    if (column.size() != size_) throw InputError("UpdatableCholesky::append: column size mismatch");
    if (size_ == capacity()) grow();
    Vector<Scalar> l = column;
    if (size_ > 0) L_.topLeftCorner(size_, size_).template triangularView<Eigen::Lower>().solveInPlace(l);
    const Scalar pivot = diagonal - l.squaredNorm();
    if (!(pivot > Scalar(0))) throw NumericalError("UpdatableCholesky::append: matrix is not positive definite");
    L_.row(size_).head(size_) = l.transpose();
    L_(size_, size_) = std::sqrt(pivot);
    ++size_;
  }

  /// Deletes row and column `position` of A.
  void remove(Index position) {
    if (position < 0 || position >= size_) throw InputError("UpdatableCholesky::remove: bad position");
    const Index tail = size_ - position - 1;
    Vector<Scalar> spill = L_.col(position).segment(position + 1, tail);
    // Shift rows below `position` up by one, then the trailing block left.
    for (Index r = position; r + 1 < size_; ++r) {
      for (Index c = 0; c < position; ++c) L_(r, c) = L_(r + 1, c);
      for (Index c = position; c <= r; ++c) L_(r, c) = L_(r + 1, c + 1);
    }
    L_.row(size_ - 1).head(size_).setZero();
    L_.col(size_ - 1).head(size_).setZero();
    --size_;
    rank_one_update(position, spill);
  }

  Vector<Scalar> solve(const Vector<Scalar>& b) const {
    if (b.size() != size_) throw InputError("UpdatableCholesky::solve: size mismatch");
    Vector<Scalar> x = b;
    if (size_ == 0) return x;
    const auto L = L_.topLeftCorner(size_, size_);
    L.template triangularView<Eigen::Lower>().solveInPlace(x);
    L.transpose().template triangularView<Eigen::Upper>().solveInPlace(x);
    return x;
  }

  Matrix<Scalar> factor() const { return L_.topLeftCorner(size_, size_); }
  Matrix<Scalar> reconstruct() const {
    const Matrix<Scalar> L = factor();
    return L * L.transpose();
  }

 private:
  void grow() {
    const Index cap = std::max<Index>(4, 2 * capacity());
    Matrix<Scalar> bigger = Matrix<Scalar>::Zero(cap, cap);
    bigger.topLeftCorner(size_, size_) = L_.topLeftCorner(size_, size_);
    L_.swap(bigger);
  }

  // L_tail L_tail' += v v' on the trailing block starting at `start`.
  void rank_one_update(Index start, Vector<Scalar> v) {
    const Index m = size_ - start;
    for (Index k = 0; k < m; ++k) {
      const Index kk = start + k;
      const Scalar lkk = L_(kk, kk);
      const Scalar r = std::hypot(lkk, v[k]);
      const Scalar c = r / lkk;
      const Scalar s = v[k] / lkk;
      L_(kk, kk) = r;
      for (Index i = k + 1; i < m; ++i) {
        const Index ii = start + i;
        L_(ii, kk) = (L_(ii, kk) + s * v[i]) / c;
        v[i] = c * v[i] - s * L_(ii, kk);
      }
    }
  }

  Matrix<Scalar> L_;
  Index size_ = 0;
};

}  // namespace subind

#endif  // SUBIND_CHOLESKY_UPDATE_HPP

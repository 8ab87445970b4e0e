#ifndef SUBIND_QUADRATIC_FORM_HPP
#define SUBIND_QUADRATIC_FORM_HPP

#include "subind/common.hpp"

#include <optional>
#include <sstream>

namespace subind {

/// f(x) = -a'x + 1/2 x'Qx + k0.
///
/// The solvers in this library require Q to be a Stieltjes matrix: symmetric,
/// positive definite and with nonpositive off-diagonal entries. Such a form is
/// strictly convex and submodular.
template <typename Scalar>
struct QuadraticForm {
  Matrix<Scalar> Q;
  Vector<Scalar> a;
  Scalar k0 = Scalar(0);

  Index dimension() const { return a.size(); }

  Scalar value(const Vector<Scalar>& x) const {
    return -a.dot(x) + Scalar(0.5) * x.dot(Q * x) + k0;
  }

  Vector<Scalar> gradient(const Vector<Scalar>& x) const { return Q * x - a; }

  template <typename NewScalar>
  QuadraticForm<NewScalar> cast() const {
    return {Q.template cast<NewScalar>(), a.template cast<NewScalar>(),
            static_cast<NewScalar>(k0)};
  }
};

/// Describes why a matrix fails the Stieltjes test; empty when it passes.
template <typename Scalar>
std::optional<std::string> stieltjes_violation(const Matrix<Scalar>& Q) {
  if (Q.rows() != Q.cols()) return "matrix is not square";
  const Index n = Q.rows();
  const Scalar scale = n > 0 ? Q.cwiseAbs().maxCoeff() : Scalar(1);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (!(Q(i, j) == Q(i, j))) return "matrix has NaN entries";
      if (i == j) continue;
      if (std::abs(Q(i, j) - Q(j, i)) > Scalar(64) * std::numeric_limits<Scalar>::epsilon() * scale) {
        std::ostringstream msg;
        msg << "matrix is not symmetric at (" << i << ", " << j << ")";
        return msg.str();
      }
      if (Q(i, j) > Scalar(0)) {
        std::ostringstream msg;
        msg << "positive off-diagonal entry Q(" << i << ", " << j << ") = " << Q(i, j);
        return msg.str();
      }
    }
  }
  Eigen::LLT<Matrix<Scalar>> llt(Q);
  if (llt.info() != Eigen::Success) return "matrix is not positive definite";
  return std::nullopt;
}

template <typename Scalar>
bool is_stieltjes(const Matrix<Scalar>& Q) {
  return !stieltjes_violation(Q).has_value();
}

template <typename Scalar>
void require_stieltjes(const QuadraticForm<Scalar>& quad) {
  if (quad.Q.rows() != quad.a.size())
    throw InputError("quadratic form: Q and a have inconsistent sizes");
  if (auto why = stieltjes_violation(quad.Q))
    throw InputError("quadratic form is not Stieltjes: " + *why);
}

}  // namespace subind

#endif  // SUBIND_QUADRATIC_FORM_HPP

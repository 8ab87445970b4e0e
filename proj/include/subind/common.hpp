#ifndef SUBIND_COMMON_HPP
#define SUBIND_COMMON_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace subind {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Binary decision vector; entries are 0 or 1.
using BinaryVector = std::vector<std::uint8_t>;

/// Malformed or inconsistent input (bad dimensions, violated preconditions).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not certify its result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
constexpr Scalar infinity() {
  return std::numeric_limits<Scalar>::infinity();
}

template <typename Scalar>
bool is_finite(Scalar v) {
  return v == v && v != infinity<Scalar>() && v != -infinity<Scalar>();
}

/// Componentwise clamp of `x` into [lower, upper]; infinite bounds are allowed.
template <typename Scalar>
Vector<Scalar> clamp(const Vector<Scalar>& x, const Vector<Scalar>& lower,
                     const Vector<Scalar>& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

}  // namespace subind

#endif  // SUBIND_COMMON_HPP

#ifndef SUBIND_LATTICE_HPP
#define SUBIND_LATTICE_HPP

#include "subind/common.hpp"

#include <functional>
#include <optional>
#include <span>
#include <utility>

namespace subind {

/// Which side of zero a continuous variable may take.
enum class SignClass {
  plus,        // 0 <= l <= u
  minus,       // l <= u <= 0, l < 0
  plus_minus,  // l < 0 < u
};

enum class SplitSide { plus, minus };

struct BinaryCoordinate {
  Index variable;
  SplitSide side;
};

/// Sign splitting of one indicator per variable into (z+, z-) coordinates.
///
/// Binary vectors are laid out as the z+ block (variables of N+ and N+-, in
/// variable order) followed by the z- block (variables of N- and N+-). The
/// original indicator is recovered as z = z+ + (1 - z-), where a missing
/// coordinate reads as z+ = 0 or z- = 1.
struct SignSplitMap {
  std::vector<SignClass> classes;
  std::vector<Index> n_plus;
  std::vector<Index> n_minus;
  std::vector<Index> n_pm;
  std::vector<BinaryCoordinate> coordinates;
  std::vector<Index> plus_coordinate;   // -1 when the variable has no z+
  std::vector<Index> minus_coordinate;  // -1 when the variable has no z-

  Index num_variables() const { return static_cast<Index>(classes.size()); }
  Index binary_dim() const { return static_cast<Index>(coordinates.size()); }

  /// Original indicators. The pattern (z+, z-) = (1, 0) of N+- is outside the
  /// feasible set z- >= z+ but has the same box as (1, 1); it maps to 1.
  BinaryVector to_original(const BinaryVector& zbin) const;

  /// Consistent split of original indicators; the sign of `x` decides
  /// between (1, 1) and (0, 0) for switched-on N+- variables.
  BinaryVector from_original(const BinaryVector& z, const Vector<double>& x) const;
};

/// Linear cost over split coordinates: constant + linear'zbin.
struct BinaryCost {
  double constant = 0.0;
  Vector<double> linear;

  double evaluate(const BinaryVector& zbin) const;
};

struct SplitResult {
  SignSplitMap map;
  BinaryCost cost;
};

/// Partitions variables into N+, N-, N+- and emits the equivalent linear cost.
/// The coupling z- >= z+ is not emitted: the binary problem lives on the full
/// hypercube.
SplitResult split(const Vector<double>& lower, const Vector<double>& upper,
                  const Vector<double>& costs);

/// b * z with the convention 0 * inf = 0.
template <typename Scalar>
Scalar scale_bound(Scalar bound, bool on) {
  return on ? bound : Scalar(0);
}

/// Box [lo, hi] of the continuous variables for a fixed split binary vector.
template <typename Scalar>
std::pair<Vector<Scalar>, Vector<Scalar>> bounds_for_binary(const SignSplitMap& map,
                                                            const BinaryVector& zbin,
                                                            const Vector<Scalar>& lower,
                                                            const Vector<Scalar>& upper) {
  const Index n = map.num_variables();
  if (static_cast<Index>(zbin.size()) != map.binary_dim())
    throw InputError("bounds_for_binary: binary vector has wrong dimension");
  if (lower.size() != n || upper.size() != n)
    throw InputError("bounds_for_binary: bound vectors have wrong dimension");
  Vector<Scalar> lo(n), hi(n);
  for (Index i = 0; i < n; ++i) {
    const Index p = map.plus_coordinate[i];
    const Index m = map.minus_coordinate[i];
    switch (map.classes[i]) {
      case SignClass::plus:
        lo[i] = scale_bound(lower[i], zbin[p] != 0);
        hi[i] = scale_bound(upper[i], zbin[p] != 0);
        break;
      case SignClass::minus:
        lo[i] = scale_bound(lower[i], zbin[m] == 0);
        hi[i] = scale_bound(upper[i], zbin[m] == 0);
        break;
      case SignClass::plus_minus:
        lo[i] = scale_bound(lower[i], zbin[m] == 0);
        hi[i] = scale_bound(upper[i], zbin[p] != 0);
        break;
    }
  }
  return {lo, hi};
}

// Submodularity testers for the zeroth-, first- and second-order definitions.

struct ZerothOrderWitness {
  Vector<double> y;
  Index i = 0;
  Index j = 0;
  double step_i = 0.0;
  double step_j = 0.0;
  double lhs = 0.0;  // f(y + ci ei) + f(y + cj ej)
  double rhs = 0.0;  // f(y) + f(y + ci ei + cj ej)
};

/// Checks f(y + ci ei) + f(y + cj ej) >= f(y) + f(y + ci ei + cj ej) - tol for
/// every probe, every pair i != j and every pair of steps. Returns the first
/// violation, or nothing when all probes pass.
std::optional<ZerothOrderWitness> check_submodular_zeroth(
    const std::function<double(const Vector<double>&)>& fun, std::span<const Vector<double>> probes,
    std::span<const double> steps, double tol = 1e-8);

struct FirstOrderWitness {
  Vector<double> y;
  Index i = 0;
  Index j = 0;
  double larger_step = 0.0;
  double smaller_step = 0.0;
  double violation = 0.0;
};

/// Checks d_i f(y + c1 ej) <= d_i f(y + c2 ej) + tol for c1 >= c2 over the
/// given steps.
std::optional<FirstOrderWitness> check_submodular_first(
    const std::function<Vector<double>(const Vector<double>&)>& gradient,
    std::span<const Vector<double>> probes, std::span<const double> steps, double tol = 1e-8);

struct SecondOrderWitness {
  Index i = 0;
  Index j = 0;
  double value = 0.0;
};

/// Checks that every off-diagonal Hessian entry is <= tol.
std::optional<SecondOrderWitness> check_submodular_second(const Matrix<double>& hessian,
                                                          double tol = 0.0);

struct SetFunctionWitness {
  BinaryVector first;
  BinaryVector second;
  double lhs = 0.0;  // F(A) + F(B)
  double rhs = 0.0;  // F(A meet B) + F(A join B)
};

/// Exhaustive pairwise check of F(A) + F(B) >= F(A meet B) + F(A join B) - tol
/// on {0,1}^m. Every point is evaluated once; m is capped at 20.
std::optional<SetFunctionWitness> check_set_function_submodular(
    const std::function<double(const BinaryVector&)>& fun, Index m, double tol = 1e-8);

enum class LatticeKind { l_plus, l_minus, l_pm };

struct LatticeCheck {
  Vector<double> meet;
  Vector<double> join;
  bool meet_member = false;
  bool join_member = false;

  bool closed() const { return meet_member && join_member; }
};

/// Membership of (x, z) in L+ / L-, or of (x, z+, z-) in L+-.
bool in_lattice_set(LatticeKind kind, double lower, double upper, const Vector<double>& point);

/// Confirms that meet and join of two members are members. Throws InputError
/// when either point is not in the set to begin with.
LatticeCheck check_lattice_membership(LatticeKind kind, double lower, double upper,
                                      const Vector<double>& first, const Vector<double>& second);

}  // namespace subind

#endif  // SUBIND_LATTICE_HPP

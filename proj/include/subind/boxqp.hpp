#ifndef SUBIND_BOXQP_HPP
#define SUBIND_BOXQP_HPP

#include "subind/lattice.hpp"
#include "subind/quadratic_form.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace subind {

/// S: at lower bound, T: at upper bound, R: free. Variables with equal bounds
/// are reported in S.
struct ActiveSetPartition {
  std::vector<Index> S;
  std::vector<Index> T;
  std::vector<Index> R;
};

template <typename Scalar>
struct BoxQpSolution {
  Vector<Scalar> x;
  Scalar value = Scalar(0);
  ActiveSetPartition partition;
  Scalar kkt_residual = Scalar(0);
  int iterations = 0;
};

struct BoxQpOptions {
  /// Re-run the Stieltjes test on Q. Callers that already validated the form
  /// may switch it off.
  bool validate = true;
  int max_iterations = -1;  // default: 20 n + 50
};

namespace boxqp {

/// Largest violation of the box KKT conditions at x for the given partition:
/// gradient >= 0 on S, <= 0 on T, = 0 on R, plus any bound violation.
template <typename Scalar>
Scalar kkt_residual(const QuadraticForm<Scalar>& quad, const Vector<Scalar>& lower,
                    const Vector<Scalar>& upper, const Vector<Scalar>& x,
                    const ActiveSetPartition& part) {
  const Vector<Scalar> g = quad.gradient(x);
  Scalar worst(0);
  for (Index i : part.S)
    if (lower[i] != upper[i]) worst = std::max(worst, -g[i]);
  for (Index i : part.T)
    if (lower[i] != upper[i]) worst = std::max(worst, g[i]);
  for (Index i : part.R) worst = std::max(worst, std::abs(g[i]));
  for (Index i = 0; i < x.size(); ++i) {
    worst = std::max(worst, lower[i] - x[i]);
    worst = std::max(worst, x[i] - upper[i]);
  }
  return worst;
}

/// Audit tolerance used by solve(): 1e-10 (1 + |a|_inf), widened for scalar
/// types with less precision than double.
template <typename Scalar>
Scalar kkt_tolerance(const QuadraticForm<Scalar>& quad) {
  const Scalar anorm = quad.a.size() > 0 ? quad.a.cwiseAbs().maxCoeff() : Scalar(0);
  const Scalar unit = std::max(Scalar(1e-10), Scalar(1e6) * std::numeric_limits<Scalar>::epsilon());
  return unit * (Scalar(1) + anorm);
}

namespace detail {

enum class BoundState : std::uint8_t { free, lower, upper };

}  // namespace detail

/// Exact minimizer of -a'x + 1/2 x'Qx + k0 over lower <= x <= upper.
///
/// Primal active-set method started from clamp(Q^-1 a, lower, upper). Each
/// working-set change refactors Q_RR, so a solve costs O(|R|^3) per
/// iteration; this is the trusted slow oracle, not the fast path.
template <typename Scalar>
BoxQpSolution<Scalar> solve(const QuadraticForm<Scalar>& quad, const Vector<Scalar>& lower,
                            const Vector<Scalar>& upper, const BoxQpOptions& options = {}) {
  using detail::BoundState;
  const Index n = quad.dimension();
  if (quad.Q.rows() != n || quad.Q.cols() != n || lower.size() != n || upper.size() != n)
    throw InputError("boxqp: inconsistent dimensions");
  for (Index i = 0; i < n; ++i) {
    if (!(lower[i] <= upper[i])) {
      std::ostringstream msg;
      msg << "boxqp: empty box at index " << i << " (" << lower[i] << " > " << upper[i] << ")";
      throw InputError(msg.str());
    }
    if (lower[i] == infinity<Scalar>() || upper[i] == -infinity<Scalar>())
      throw InputError("boxqp: bound interval excludes every real value");
  }
  if (options.validate) require_stieltjes(quad);

  BoxQpSolution<Scalar> sol;
  if (n == 0) {
    sol.x = Vector<Scalar>(0);
    sol.value = quad.k0;
    return sol;
  }

  const Scalar tol = kkt_tolerance(quad);
  const Scalar release_tol = tol * Scalar(1e-2);

  std::vector<BoundState> state(n, BoundState::free);
  const Vector<Scalar> unconstrained = quad.Q.llt().solve(quad.a);
  Vector<Scalar> x(n);
  for (Index i = 0; i < n; ++i) {
    if (unconstrained[i] <= lower[i]) {
      x[i] = lower[i];
      state[i] = BoundState::lower;
    } else if (unconstrained[i] >= upper[i]) {
      x[i] = upper[i];
      state[i] = BoundState::upper;
    } else {
      x[i] = unconstrained[i];
    }
  }

  const int cap = options.max_iterations > 0 ? options.max_iterations : static_cast<int>(20 * n + 50);
  std::vector<Index> free_set, fixed_set;
  bool done = false;
  int it = 0;
  for (; it < cap && !done; ++it) {
    free_set.clear();
    fixed_set.clear();
    for (Index i = 0; i < n; ++i)
      (state[i] == BoundState::free ? free_set : fixed_set).push_back(i);

    Vector<Scalar> target;
    if (!free_set.empty()) {
      Vector<Scalar> rhs = quad.a(free_set);
      if (!fixed_set.empty()) rhs.noalias() -= quad.Q(free_set, fixed_set) * x(fixed_set);
      const Matrix<Scalar> block = quad.Q(free_set, free_set);
      Eigen::LLT<Matrix<Scalar>> llt(block);
      if (llt.info() != Eigen::Success) throw NumericalError("boxqp: free block is not positive definite");
      target = llt.solve(rhs);
    }
    const Vector<Scalar> current = free_set.empty() ? Vector<Scalar>(0) : Vector<Scalar>(x(free_set));
    const Vector<Scalar> step = target - current;
    const Scalar scale = Scalar(1) + (current.size() > 0 ? current.cwiseAbs().maxCoeff() : Scalar(0));
    const bool stationary =
        step.size() == 0 || step.cwiseAbs().maxCoeff() <= Scalar(16) * std::numeric_limits<Scalar>::epsilon() * scale;

    if (stationary) {
      for (std::size_t k = 0; k < free_set.size(); ++k) x[free_set[k]] = target[k];
      const Vector<Scalar> g = quad.gradient(x);
      Index worst = -1;
      Scalar worst_violation = release_tol;
      for (Index i : fixed_set) {
        if (lower[i] == upper[i]) continue;
        const Scalar violation = state[i] == BoundState::lower ? -g[i] : g[i];
        if (violation > worst_violation) {
          worst_violation = violation;
          worst = i;
        }
      }
      if (worst < 0) {
        done = true;
      } else {
        state[worst] = BoundState::free;
      }
      continue;
    }

    // Longest feasible fraction of the step; ties go to the smallest index.
    Scalar alpha(1);
    Index blocking = -1;
    BoundState blocking_state = BoundState::free;
    for (std::size_t k = 0; k < free_set.size(); ++k) {
      const Index i = free_set[k];
      Scalar limit = infinity<Scalar>();
      BoundState hit = BoundState::free;
      if (step[k] < Scalar(0) && is_finite(lower[i])) {
        limit = (lower[i] - x[i]) / step[k];
        hit = BoundState::lower;
      } else if (step[k] > Scalar(0) && is_finite(upper[i])) {
        limit = (upper[i] - x[i]) / step[k];
        hit = BoundState::upper;
      }
      if (limit < alpha) {
        alpha = std::max(limit, Scalar(0));
        blocking = i;
        blocking_state = hit;
      }
    }
    for (std::size_t k = 0; k < free_set.size(); ++k) x[free_set[k]] += alpha * step[k];
    if (blocking >= 0) {
      state[blocking] = blocking_state;
      x[blocking] = blocking_state == BoundState::lower ? lower[blocking] : upper[blocking];
    }
  }
  if (!done) throw NumericalError("boxqp: active-set iteration cap reached");

  // Free variables sitting exactly on a bound are reported at that bound.
  for (Index i = 0; i < n; ++i) {
    if (lower[i] == upper[i]) {
      sol.partition.S.push_back(i);
    } else if (state[i] == BoundState::lower || x[i] == lower[i]) {
      sol.partition.S.push_back(i);
    } else if (state[i] == BoundState::upper || x[i] == upper[i]) {
      sol.partition.T.push_back(i);
    } else {
      sol.partition.R.push_back(i);
    }
  }
  sol.x = std::move(x);
  sol.value = quad.value(sol.x);
  sol.iterations = it;
  sol.kkt_residual = kkt_residual(quad, lower, upper, sol.x, sol.partition);
  if (!(sol.kkt_residual <= tol)) {
    std::ostringstream msg;
    msg << "boxqp: KKT residual " << sol.kkt_residual << " exceeds tolerance " << tol;
    throw NumericalError(msg.str());
  }
  return sol;
}

/// v(zbin): minimum of f over the box selected by the split binary vector.
template <typename Scalar>
Scalar value_function(const QuadraticForm<Scalar>& quad, const Vector<Scalar>& lower,
                      const Vector<Scalar>& upper, const SignSplitMap& map, const BinaryVector& zbin,
                      const BoxQpOptions& options = {}) {
  const auto [lo, hi] = bounds_for_binary(map, zbin, lower, upper);
  return solve(quad, lo, hi, options).value;
}

}  // namespace boxqp

}  // namespace subind

#endif  // SUBIND_BOXQP_HPP

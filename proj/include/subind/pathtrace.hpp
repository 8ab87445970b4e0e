#ifndef SUBIND_PATHTRACE_HPP
#define SUBIND_PATHTRACE_HPP

#include "subind/boxqp.hpp"
#include "subind/cholesky_update.hpp"
#include "subind/lattice.hpp"
#include "subind/quadratic_form.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <sstream>
#include <string_view>

namespace subind {

enum class BreakpointEvent { leave_lower, hit_upper, leave_zero, hit_zero };

inline std::string_view to_string(BreakpointEvent event) {
  switch (event) {
    case BreakpointEvent::leave_lower: return "leave_lower";
    case BreakpointEvent::hit_upper: return "hit_upper";
    case BreakpointEvent::leave_zero: return "leave_zero";
    case BreakpointEvent::hit_zero: return "hit_zero";
  }
  return "unknown";
}

template <typename Scalar>
struct Breakpoint {
  Index stage = 0;        // 1-based: the stage that switches on order[stage - 1]
  Scalar parameter = 0;   // value of the moving coordinate at the pivot
  Index index = 0;        // variable that changed status
  BreakpointEvent event = BreakpointEvent::leave_lower;
};

/// Full iterate at a parameter value, recorded when ChainOptions::record_iterates is set.
template <typename Scalar>
struct PathSample {
  Index stage = 0;
  Index variable = -1;    // moving coordinate, -1 for the stage-0 point
  Scalar parameter = 0;
  Vector<Scalar> x;
};

/// Values v(1_[0]), ..., v(1_[m]) of a prefix chain of binary coordinates.
template <typename Scalar>
struct ValueChain {
  std::vector<Index> order;
  std::vector<Scalar> values;
  std::vector<Vector<Scalar>> minimizers;
  std::vector<Breakpoint<Scalar>> breakpoints;
  std::vector<PathSample<Scalar>> samples;
};

struct ChainOptions {
  /// Record the iterate after every pivot and at every stage end.
  bool record_iterates = false;
  /// Audit the full KKT system at every breakpoint, including gradient signs on T.
  bool audit = false;
};

/// Where an increasing trace of the moving coordinate stops: at `value`, or,
/// with `optimize`, at the minimizer of the parametric value over [lower, upper].
template <typename Scalar>
struct TraceTarget {
  bool optimize = false;
  Scalar value = 0;
  Scalar lower = 0;
  Scalar upper = 0;

  static TraceTarget to_value(Scalar b) { return {false, b, b, b}; }
  static TraceTarget to_optimum(Scalar lo, Scalar hi) { return {true, lo, lo, hi}; }
};

template <typename Scalar>
class PathState;

template <typename Scalar>
PathState<Scalar> trace_path(const QuadraticForm<Scalar>& quad, PathState<Scalar> state,
                             const TraceTarget<Scalar>& target,
                             std::vector<Breakpoint<Scalar>>* log = nullptr,
                             std::vector<PathSample<Scalar>>* samples = nullptr, bool audit = false);

/// Mutable state of the parametric active-set trace.
///
/// Every variable except the moving coordinate is in exactly one of R (free),
/// S (at lower bound), T (at upper bound) or fixed (lo == hi). The Cholesky
/// factor of Q_RR is kept in `factor`, with `free_order[p]` the variable at
/// factor position p.
template <typename Scalar>
class PathState {
 public:
  enum class Role : std::uint8_t { free, lower, upper, fixed, moving };

  PathState() = default;

  /// Builds the state around a point x that is optimal for the box [lo, hi].
  PathState(const QuadraticForm<Scalar>& quad, Vector<Scalar> lo, Vector<Scalar> hi, Vector<Scalar> x)
      : lo_(std::move(lo)), hi_(std::move(hi)), x_(std::move(x)) {
    const Index n = quad.dimension();
    if (lo_.size() != n || hi_.size() != n || x_.size() != n)
      throw InputError("PathState: inconsistent dimensions");
    role_.assign(n, Role::fixed);
    position_.assign(n, -1);
    zero_lower_.assign(n, false);
    zero_upper_.assign(n, false);
    factor_ = UpdatableCholesky<Scalar>(n);
    for (Index i = 0; i < n; ++i) classify(quad, i);
  }

  Index stage = 0;

  const Vector<Scalar>& x() const { return x_; }
  const Vector<Scalar>& lower() const { return lo_; }
  const Vector<Scalar>& upper() const { return hi_; }
  Role role(Index i) const { return role_[i]; }
  Index moving() const { return moving_; }
  Scalar parameter() const { return moving_ >= 0 ? x_[moving_] : Scalar(0); }
  const std::vector<Index>& free_order() const { return free_order_; }

  ActiveSetPartition partition() const {
    ActiveSetPartition part;
    for (Index i = 0; i < static_cast<Index>(role_.size()); ++i) {
      switch (role_[i]) {
        case Role::free: part.R.push_back(i); break;
        case Role::lower:
        case Role::fixed: part.S.push_back(i); break;
        case Role::upper: part.T.push_back(i); break;
        case Role::moving: break;
      }
    }
    return part;
  }

  /// Marks whether variable i's current lower/upper bound is a zero pinned by
  /// its indicator rather than a bound of the original problem.
  void set_zero_flags(Index i, bool zero_lower, bool zero_upper) {
    zero_lower_[i] = zero_lower;
    zero_upper_[i] = zero_upper;
  }

  /// Turns variable j into the moving coordinate, removing it from the partition.
  void release(Index j) {
    if (moving_ >= 0) throw InputError("PathState::release: a coordinate is already moving");
    if (role_[j] == Role::free) drop_free(j);
    role_[j] = Role::moving;
    moving_ = j;
  }

  /// Ends the stage: the moving coordinate takes the box [lo, hi] and rejoins
  /// the partition according to its value.
  void settle(const QuadraticForm<Scalar>& quad, Scalar lo, Scalar hi) {
    if (moving_ < 0) throw InputError("PathState::settle: no moving coordinate");
    const Index j = moving_;
    lo_[j] = lo;
    hi_[j] = hi;
    x_[j] = std::clamp(x_[j], lo, hi);
    moving_ = -1;
    classify(quad, j);
  }

  // Trace internals; see trace_path().
  friend PathState trace_path<>(const QuadraticForm<Scalar>&, PathState, const TraceTarget<Scalar>&,
                                std::vector<Breakpoint<Scalar>>*, std::vector<PathSample<Scalar>>*, bool);

 private:
  void classify(const QuadraticForm<Scalar>& quad, Index i) {
    if (lo_[i] == hi_[i]) {
      role_[i] = Role::fixed;
      x_[i] = lo_[i];
    } else if (x_[i] <= lo_[i]) {
      role_[i] = Role::lower;
      x_[i] = lo_[i];
    } else if (x_[i] >= hi_[i]) {
      role_[i] = Role::upper;
      x_[i] = hi_[i];
    } else {
      add_free(quad, i);
    }
  }

  void add_free(const QuadraticForm<Scalar>& quad, Index i) {
    Vector<Scalar> column(static_cast<Index>(free_order_.size()));
    for (std::size_t p = 0; p < free_order_.size(); ++p) column[p] = quad.Q(free_order_[p], i);
    factor_.append(column, quad.Q(i, i));
    position_[i] = static_cast<Index>(free_order_.size());
    free_order_.push_back(i);
    role_[i] = Role::free;
  }

  void drop_free(Index i) {
    const Index p = position_[i];
    factor_.remove(p);
    free_order_.erase(free_order_.begin() + p);
    for (std::size_t q = p; q < free_order_.size(); ++q) position_[free_order_[q]] = static_cast<Index>(q);
    position_[i] = -1;
  }

  Vector<Scalar> lo_, hi_, x_;
  std::vector<Role> role_;
  std::vector<Index> position_;
  std::vector<Index> free_order_;
  std::vector<bool> zero_lower_, zero_upper_;
  UpdatableCholesky<Scalar> factor_;
  Index moving_ = -1;
};

namespace detail {

template <typename Scalar>
Scalar trace_scale(const QuadraticForm<Scalar>& quad, const Vector<Scalar>& x) {
  const Scalar a = quad.a.size() > 0 ? quad.a.cwiseAbs().maxCoeff() : Scalar(0);
  const Scalar xs = x.size() > 0 ? x.cwiseAbs().maxCoeff() : Scalar(0);
  return Scalar(1) + a + xs;
}

}  // namespace detail

/// Moves the parameter of `state` upward along the piecewise-affine path of
/// minimizers of the remaining variables.
///
/// On each segment, with C the variables held constant (S, T and fixed),
///   y_R(t) = Q_RR^-1 (a_R - Q_RC x_C) - Q_RR^-1 Q_Rj t,
/// the ratio test picks the nearest of: a free variable reaching its upper
/// bound (R -> T), a lower-bound variable whose gradient reaches zero
/// (S -> R), or the stop point min(max(lower, t_bar), upper) where t_bar is
/// the root of the parameter's own derivative. Ties pivot the smallest
/// variable index first, one pivot per iteration.
template <typename Scalar>
PathState<Scalar> trace_path(const QuadraticForm<Scalar>& quad, PathState<Scalar> state,
                             const TraceTarget<Scalar>& target,
                             std::vector<Breakpoint<Scalar>>* log,
                             std::vector<PathSample<Scalar>>* samples, bool audit) {
  using Role = typename PathState<Scalar>::Role;
  const Index j = state.moving_;
  if (j < 0) throw InputError("trace_path: no moving coordinate");
  const Index n = quad.dimension();
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const Scalar scale = detail::trace_scale(quad, state.x_);
  const Scalar retreat_tol = Scalar(1e-12) * scale;
  const Scalar audit_tol = std::max(Scalar(1e-8), Scalar(1e4) * eps) * scale;

  std::vector<Index> constant;
  std::vector<Index> lower_set;
  const auto refresh_sets = [&] {
    constant.clear();
    lower_set.clear();
    for (Index i = 0; i < n; ++i) {
      const Role r = state.role_[i];
      if (r == Role::lower || r == Role::upper || r == Role::fixed) constant.push_back(i);
      if (r == Role::lower) lower_set.push_back(i);
    }
  };

  const auto audit_state = [&](bool check_upper) {
    const Vector<Scalar> g = quad.gradient(state.x_);
    Scalar worst(0);
    Index where = -1;
    for (Index i = 0; i < n; ++i) {
      Scalar v(0);
      switch (state.role_[i]) {
        case Role::free: v = std::abs(g[i]); break;
        case Role::lower: v = -g[i]; break;
        case Role::upper: v = check_upper ? g[i] : Scalar(0); break;
        default: break;
      }
      v = std::max({v, state.lo_[i] - state.x_[i], state.x_[i] - state.hi_[i]});
      if (state.role_[i] != Role::moving && v > worst) {
        worst = v;
        where = i;
      }
    }
    if (worst > audit_tol) {
      std::ostringstream msg;
      msg << "trace_path: KKT audit failed at variable " << where << " (violation " << worst << ")";
      throw NumericalError(msg.str());
    }
  };

  if (target.optimize ? target.upper < target.lower : false)
    throw InputError("trace_path: empty target interval");
  if (!target.optimize && target.value < state.x_[j] - retreat_tol)
    throw InputError("trace_path: decreasing traces are not supported");

  refresh_sets();
  audit_state(true);

  const auto record = [&](Scalar t) {
    if (samples) samples->push_back({state.stage, j, t, state.x_});
  };

  const Index max_pivots = 4 * n + 8;
  for (Index pivots = 0;; ++pivots) {
    if (pivots > max_pivots) throw NumericalError("trace_path: pivot budget exceeded");
    const std::vector<Index>& R = state.free_order_;
    const Index r = static_cast<Index>(R.size());
    const Scalar t = state.x_[j];

    // Segment: y_R(s) = alpha - beta s.
    Vector<Scalar> alpha(r), beta(r);
    if (r > 0) {
      Vector<Scalar> rhs = quad.a(R);
      if (!constant.empty()) rhs.noalias() -= quad.Q(R, constant) * state.x_(constant);
      alpha = state.factor_.solve(rhs);
      beta = state.factor_.solve(quad.Q.col(j)(R));
      for (Index p = 0; p < r; ++p) state.x_[R[p]] = alpha[p] - beta[p] * t;
    }

    // Derivative of the parametric value: g_j(s) = d0 + d1 s, d1 > 0.
    Scalar d0 = -quad.a[j];
    Scalar d1 = quad.Q(j, j);
    if (!constant.empty()) d0 += quad.Q.col(j)(constant).dot(state.x_(constant));
    if (r > 0) {
      const Vector<Scalar> qjr = quad.Q.col(j)(R);
      d0 += qjr.dot(alpha);
      d1 -= qjr.dot(beta);
    }
    if (!(d1 > Scalar(0))) throw NumericalError("trace_path: Schur complement is not positive");

    Scalar goal;
    if (target.optimize) {
      const Scalar root = -d0 / d1;
      goal = std::min(std::max(target.lower, root), target.upper);
    } else {
      goal = target.value;
    }
    if (goal <= t) {
      // Stop point at or behind the current parameter: nothing left to trace.
      break;
    }

    // Ratio test over R (upper bounds) and S (gradient sign).
    Scalar best = infinity<Scalar>();
    Index best_var = -1;
    bool best_from_free = false;
    const auto offer = [&](Scalar ratio, Index var, bool from_free) {
      if (ratio < best || (ratio == best && var < best_var)) {
        best = ratio;
        best_var = var;
        best_from_free = from_free;
      }
    };
    for (Index p = 0; p < r; ++p) {
      const Index i = R[p];
      if (beta[p] < Scalar(0) && is_finite(state.hi_[i])) offer((alpha[p] - state.hi_[i]) / beta[p], i, true);
    }
    if (!lower_set.empty()) {
      // g_S(s) = gamma + delta s
      Vector<Scalar> gamma = quad.Q(lower_set, constant) * state.x_(constant) - quad.a(lower_set);
      Vector<Scalar> delta = quad.Q.col(j)(lower_set);
      if (r > 0) {
        const Matrix<Scalar> qsr = quad.Q(lower_set, R);
        gamma.noalias() += qsr * alpha;
        delta.noalias() -= qsr * beta;
      }
      for (std::size_t q = 0; q < lower_set.size(); ++q)
        if (delta[q] < Scalar(0)) offer(-gamma[q] / delta[q], lower_set[q], false);
    }

    if (best_var >= 0 && best <= goal) {
      if (best < t - retreat_tol) {
        std::ostringstream msg;
        msg << "trace_path: breakpoint " << best << " lies behind the parameter " << t << " (corrupted state)";
        throw NumericalError(msg.str());
      }
      const Scalar s = std::max(best, t);
      state.x_[j] = s;
      for (Index p = 0; p < r; ++p) state.x_[R[p]] = alpha[p] - beta[p] * s;
      const Index i = best_var;
      BreakpointEvent event;
      if (best_from_free) {
        state.drop_free(i);
        state.role_[i] = Role::upper;
        state.x_[i] = state.hi_[i];
        event = state.zero_upper_[i] ? BreakpointEvent::hit_zero : BreakpointEvent::hit_upper;
      } else {
        state.add_free(quad, i);
        event = state.zero_lower_[i] ? BreakpointEvent::leave_zero : BreakpointEvent::leave_lower;
      }
      if (log) log->push_back({state.stage, s, i, event});
      refresh_sets();
      if (audit) {
        // Recompute R at s on the new partition before auditing.
        const std::vector<Index>& R2 = state.free_order_;
        if (!R2.empty()) {
          Vector<Scalar> rhs = quad.a(R2);
          rhs -= quad.Q.col(j)(R2) * s;
          if (!constant.empty()) rhs.noalias() -= quad.Q(R2, constant) * state.x_(constant);
          const Vector<Scalar> y = state.factor_.solve(rhs);
          for (std::size_t p = 0; p < R2.size(); ++p) state.x_[R2[p]] = y[p];
        }
        audit_state(true);
      }
      record(s);
      continue;
    }

    state.x_[j] = goal;
    for (Index p = 0; p < r; ++p) state.x_[R[p]] = alpha[p] - beta[p] * goal;
    break;
  }
  // Clip rounding noise on the free block.
  for (Index i : state.free_order_) state.x_[i] = std::clamp(state.x_[i], state.lo_[i], state.hi_[i]);
  return state;
}

/// Chain of minima over the split coordinates, switched on in `order`.
///
/// `order` lists distinct binary coordinates; a partial order stops the chain
/// early. Stage 0 minimizes f over the box of the all-zero binary vector. Switching
/// on a coordinate only raises the bounds of its variable, so the minimizers
/// increase monotonically and every stage is a feasibility leg (up to the new
/// lower bound) followed by an optimality leg.
template <typename Scalar>
ValueChain<Scalar> chain_split(const QuadraticForm<Scalar>& quad, const Vector<Scalar>& lower,
                               const Vector<Scalar>& upper, const SignSplitMap& map,
                               std::span<const Index> order, const ChainOptions& options = {}) {
  const Index n = quad.dimension();
  const Index m = map.binary_dim();
  if (lower.size() != n || upper.size() != n || map.num_variables() != n)
    throw InputError("chain: inconsistent dimensions");
  for (Index i = 0; i < n; ++i) {
    if (!is_finite(lower[i]) || !is_finite(upper[i]))
      throw InputError("chain: bounds must be finite; clamp infinite bounds when compiling the model");
    if (!(lower[i] <= upper[i])) throw InputError("chain: lower bound exceeds upper bound");
  }
  if (static_cast<Index>(order.size()) > m) throw InputError("chain: order is longer than the binary dimension");
  {
    std::vector<bool> seen(m, false);
    for (Index c : order) {
      if (c < 0 || c >= m || seen[c]) throw InputError("chain: order repeats or exceeds a binary coordinate");
      seen[c] = true;
    }
  }
  require_stieltjes(quad);

  BinaryVector zbin(m, 0);
  auto [lo, hi] = bounds_for_binary(map, zbin, lower, upper);
  const auto zero_flags = [&](Index i) {
    const Index p = map.plus_coordinate[i];
    const Index q = map.minus_coordinate[i];
    bool lo_on = true, hi_on = true;
    switch (map.classes[i]) {
      case SignClass::plus: lo_on = hi_on = zbin[p] != 0; break;
      case SignClass::minus: lo_on = hi_on = zbin[q] == 0; break;
      case SignClass::plus_minus:
        lo_on = zbin[q] == 0;
        hi_on = zbin[p] != 0;
        break;
    }
    return std::pair<bool, bool>{!lo_on && lower[i] != Scalar(0), !hi_on && upper[i] != Scalar(0)};
  };

  BoxQpOptions no_validate;
  no_validate.validate = false;
  const BoxQpSolution<Scalar> start = boxqp::solve(quad, lo, hi, no_validate);

  ValueChain<Scalar> chain;
  chain.order.assign(order.begin(), order.end());
  const Index stages = static_cast<Index>(order.size());
  chain.values.reserve(stages + 1);
  chain.minimizers.reserve(stages + 1);
  PathState<Scalar> state(quad, lo, hi, start.x);
  for (Index i = 0; i < n; ++i) {
    const auto [zl, zu] = zero_flags(i);
    state.set_zero_flags(i, zl, zu);
  }
  chain.values.push_back(quad.value(state.x()));
  chain.minimizers.push_back(state.x());
  if (options.record_iterates) chain.samples.push_back({0, -1, Scalar(0), state.x()});

  auto* log = &chain.breakpoints;
  auto* samples = options.record_iterates ? &chain.samples : nullptr;
  for (Index k = 0; k < stages; ++k) {
    const Index c = order[k];
    const Index i = map.coordinates[c].variable;
    zbin[c] = 1;
    Scalar new_lo, new_hi;
    {
      const Index p = map.plus_coordinate[i];
      const Index q = map.minus_coordinate[i];
      switch (map.classes[i]) {
        case SignClass::plus:
          new_lo = scale_bound(lower[i], zbin[p] != 0);
          new_hi = scale_bound(upper[i], zbin[p] != 0);
          break;
        case SignClass::minus:
          new_lo = scale_bound(lower[i], zbin[q] == 0);
          new_hi = scale_bound(upper[i], zbin[q] == 0);
          break;
        default:
          new_lo = scale_bound(lower[i], zbin[q] == 0);
          new_hi = scale_bound(upper[i], zbin[p] != 0);
          break;
      }
    }
    state.stage = k + 1;
    state.release(i);
    if (state.x()[i] < new_lo) {
      state = trace_path(quad, std::move(state), TraceTarget<Scalar>::to_value(new_lo), log, samples, options.audit);
    }
    state = trace_path(quad, std::move(state), TraceTarget<Scalar>::to_optimum(new_lo, new_hi), log, samples,
                       options.audit);
    state.settle(quad, new_lo, new_hi);
    const auto [zl, zu] = zero_flags(i);
    state.set_zero_flags(i, zl, zu);
    chain.values.push_back(quad.value(state.x()));
    chain.minimizers.push_back(state.x());
    if (options.record_iterates) chain.samples.push_back({k + 1, i, state.x()[i], state.x()});
  }
  return chain;
}

/// Chain for 0 <= lower <= upper < inf over the n indicators in `order`.
template <typename Scalar>
ValueChain<Scalar> chain_nonnegative(const QuadraticForm<Scalar>& quad, const Vector<Scalar>& lower,
                                     const Vector<Scalar>& upper, std::span<const Index> order,
                                     const ChainOptions& options = {}) {
  if ((lower.array() < Scalar(0)).any()) throw InputError("chain_nonnegative: lower bounds must be nonnegative");
  const SplitResult s = split(lower.template cast<double>(), upper.template cast<double>(),
                              Vector<double>::Zero(lower.size()));
  return chain_split(quad, lower, upper, s.map, order, options);
}

/// Chain over the (z+, z-) coordinates of the sign split of [lower, upper].
template <typename Scalar>
ValueChain<Scalar> chain_general(const QuadraticForm<Scalar>& quad, const Vector<Scalar>& lower,
                                 const Vector<Scalar>& upper, std::span<const Index> order,
                                 const ChainOptions& options = {}) {
  const SplitResult s = split(lower.template cast<double>(), upper.template cast<double>(),
                              Vector<double>::Zero(lower.size()));
  return chain_split(quad, lower, upper, s.map, order, options);
}

inline std::vector<Index> natural_order(Index m) {
  std::vector<Index> order(m);
  std::iota(order.begin(), order.end(), Index(0));
  return order;
}

/// Lovasz extension from a chain whose order sorts zfrac nonincreasingly.
template <typename Scalar>
Scalar lovasz(const ValueChain<Scalar>& chain, const Vector<Scalar>& zfrac) {
  const Index m = static_cast<Index>(chain.order.size());
  if (zfrac.size() != m || static_cast<Index>(chain.values.size()) != m + 1)
    throw InputError("lovasz: dimension mismatch");
  for (Index k = 0; k < m; ++k) {
    const Scalar z = zfrac[chain.order[k]];
    if (z < Scalar(0) || z > Scalar(1)) throw InputError("lovasz: point outside the unit cube");
    if (k > 0 && z > zfrac[chain.order[k - 1]])
      throw InputError("lovasz: point is not sorted nonincreasingly by the chain order");
  }
  Scalar total = chain.values[0];
  for (Index k = 0; k < m; ++k) total += (chain.values[k + 1] - chain.values[k]) * zfrac[chain.order[k]];
  return total;
}

}  // namespace subind

#endif  // SUBIND_PATHTRACE_HPP

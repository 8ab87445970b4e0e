#include "subind/sfm.hpp"

#include "subind/boxqp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace subind {

std::vector<double> SubmodularOracle::chain(std::span<const Index> order) const {
  BinaryVector z(dimension(), 0);
  std::vector<double> values;
  values.reserve(order.size() + 1);
  values.push_back(evaluate(z));
  for (Index c : order) {
    z[c] = 1;
    values.push_back(evaluate(z));
  }
  return values;
}

namespace {

BoxQpOptions unchecked() {
  BoxQpOptions o;
  o.validate = false;
  return o;
}

}  // namespace

ValueFunctionOracle::ValueFunctionOracle(QuadraticForm<double> quad, Vector<double> lower, Vector<double> upper,
                                         SignSplitMap map, ChainMethod method)
    : quad_(std::move(quad)), lower_(std::move(lower)), upper_(std::move(upper)), map_(std::move(map)) {
  require_stieltjes(quad_);
  if (lower_.size() != quad_.dimension() || upper_.size() != quad_.dimension() ||
      map_.num_variables() != quad_.dimension())
    throw InputError("ValueFunctionOracle: inconsistent dimensions");
  path_ = method == ChainMethod::path && lower_.allFinite() && upper_.allFinite();
}

BoxQpSolution<double> ValueFunctionOracle::minimizer(const BinaryVector& zbin) const {
  const auto [lo, hi] = bounds_for_binary(map_, zbin, lower_, upper_);
  return boxqp::solve(quad_, lo, hi, unchecked());
}

double ValueFunctionOracle::evaluate(const BinaryVector& zbin) const { return minimizer(zbin).value; }

ValueChain<double> ValueFunctionOracle::trace(std::span<const Index> order, const ChainOptions& options) const {
  return chain_split(quad_, lower_, upper_, map_, order, options);
}

std::vector<double> ValueFunctionOracle::chain(std::span<const Index> order) const {
  if (!path_) return SubmodularOracle::chain(order);
  return trace(order).values;
}

CostedOracle::CostedOracle(const SubmodularOracle& inner, BinaryCost cost) : inner_(inner), cost_(std::move(cost)) {
  if (cost_.linear.size() != inner_.dimension()) throw InputError("CostedOracle: cost has wrong dimension");
}

double CostedOracle::evaluate(const BinaryVector& z) const { return inner_.evaluate(z) + cost_.evaluate(z); }

std::vector<double> CostedOracle::chain(std::span<const Index> order) const {
  std::vector<double> values = inner_.chain(order);
  double running = cost_.constant;
  values[0] += running;
  for (std::size_t k = 0; k < order.size(); ++k) {
    running += cost_.linear[order[k]];
    values[k + 1] += running;
  }
  return values;
}

RestrictedOracle::RestrictedOracle(const SubmodularOracle& inner, std::vector<int> pins)
    : inner_(inner), pins_(std::move(pins)) {
  if (static_cast<Index>(pins_.size()) != inner_.dimension())
    throw InputError("RestrictedOracle: one pin entry per coordinate required");
  for (std::size_t k = 0; k < pins_.size(); ++k) {
    if (pins_[k] < 0) {
      free_.push_back(static_cast<Index>(k));
    } else if (pins_[k] == 1) {
      pinned_on_.push_back(static_cast<Index>(k));
    } else if (pins_[k] != 0) {
      throw InputError("RestrictedOracle: pins must be -1, 0 or 1");
    }
  }
}

BinaryVector RestrictedOracle::expand(const BinaryVector& z) const {
  if (static_cast<Index>(z.size()) != dimension()) throw InputError("RestrictedOracle: wrong dimension");
  BinaryVector full(pins_.size());
  for (std::size_t k = 0; k < pins_.size(); ++k) full[k] = pins_[k] > 0 ? 1 : 0;
  for (std::size_t k = 0; k < free_.size(); ++k) full[free_[k]] = z[k];
  return full;
}

double RestrictedOracle::evaluate(const BinaryVector& z) const { return inner_.evaluate(expand(z)); }

std::vector<double> RestrictedOracle::chain(std::span<const Index> order) const {
  std::vector<Index> full = pinned_on_;
  for (Index c : order) {
    if (c < 0 || c >= dimension()) throw InputError("RestrictedOracle: order out of range");
    full.push_back(free_[c]);
  }
  std::vector<double> values = inner_.chain(full);
  values.erase(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(pinned_on_.size()));
  return values;
}

std::vector<Index> sort_nonincreasing(const Vector<double>& values) {
  std::vector<Index> order(values.size());
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return values[a] > values[b]; });
  return order;
}

GreedyMinorant greedy_subgradient(const SubmodularOracle& oracle, const Vector<double>& zfrac) {
  const Index m = oracle.dimension();
  if (zfrac.size() != m) throw InputError("greedy_subgradient: point has wrong dimension");
  if (m > 0 && (zfrac.minCoeff() < 0.0 || zfrac.maxCoeff() > 1.0))
    throw InputError("greedy_subgradient: point outside the unit cube");
  GreedyMinorant out;
  out.order = sort_nonincreasing(zfrac);
  out.chain = oracle.chain(out.order);
  out.base = out.chain[0];
  out.weights.resize(m);
  for (Index k = 0; k < m; ++k) out.weights[out.order[k]] = out.chain[k + 1] - out.chain[k];
  return out;
}

namespace detail {

double tie_tolerance(double value) { return 1e-9 * (1.0 + std::abs(value)); }

bool lex_less(const BinaryVector& a, const BinaryVector& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool improves(double value, const BinaryVector& z, double best_value, const BinaryVector& best_z) {
  const double tol = tie_tolerance(best_value);
  if (value < best_value - tol) return true;
  if (value > best_value + tol) return false;
  return lex_less(z, best_z);
}

}  // namespace detail

SfmResult minimize_exhaustive(const SubmodularOracle& oracle) {
  const Index m = oracle.dimension();
  if (m > kExhaustiveLimit) {
    std::ostringstream msg;
    msg << "minimize_exhaustive: dimension " << m << " exceeds the limit of " << kExhaustiveLimit << "; use the mnp engine";
    throw InputError(msg.str());
  }
  SfmResult out;
  BinaryVector z(m, 0);
  const std::uint64_t count = std::uint64_t(1) << m;
  // Lexicographic order, so the first point within tolerance of the best is
  // the lexicographically smallest among ties.
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    for (Index k = 0; k < m; ++k) z[k] = (mask >> (m - 1 - k)) & 1;
    const double v = oracle.evaluate(z);
    ++out.evaluations;
    if (mask == 0 || v < out.value - detail::tie_tolerance(out.value)) {
      out.value = v;
      out.zstar = z;
    }
  }
  return out;
}

namespace {

class MnpSearch {
 public:
  MnpSearch(const SubmodularOracle& oracle, const MnpOptions& options)
      : oracle_(oracle), options_(options), m_(oracle.dimension()) {}

  SfmResult run() {
    result_.zstar.assign(m_, 0);
    result_.value = oracle_.evaluate(result_.zstar);
    ++result_.evaluations;
    if (m_ == 0) {
      result_.certificate = 0.0;
      return result_;
    }
    const Vector<double> x = min_norm_point();
    result_.certificate = x.norm();
    round(x);
    return result_;
  }

 private:
  // Greedy vertex for `order`; every prefix of the chain is a rounding candidate.
  Vector<double> vertex(const std::vector<Index>& order) {
    const std::vector<double> values = oracle_.chain(order);
    ++result_.chains;
    Vector<double> s(m_);
    BinaryVector z(m_, 0);
    offer(values[0], z);
    for (Index k = 0; k < m_; ++k) {
      s[order[k]] = values[k + 1] - values[k];
      z[order[k]] = 1;
      offer(values[k + 1], z);
    }
    return s;
  }

  void offer(double value, const BinaryVector& z) {
    if (detail::improves(value, z, result_.value, result_.zstar)) {
      result_.value = value;
      result_.zstar = z;
    }
  }

  // Minimizes |B alpha| subject to sum(alpha) = 1.
  static Vector<double> affine_minimizer(const Matrix<double>& B) {
    const Index k = B.cols();
    Matrix<double> K = Matrix<double>::Zero(k + 1, k + 1);
    K.topLeftCorner(k, k) = B.transpose() * B;
    K.topRightCorner(k, 1).setOnes();
    K.bottomLeftCorner(1, k).setOnes();
    Vector<double> rhs = Vector<double>::Zero(k + 1);
    rhs[k] = 1.0;
    return K.completeOrthogonalDecomposition().solve(rhs).head(k);
  }

  Vector<double> min_norm_point() {
    const Index cap = options_.max_iterations >= 0 ? options_.max_iterations : 100 * m_ + 1000;
    std::vector<Vector<double>> S{vertex(natural_order(m_))};
    std::vector<double> lambda{1.0};
    Vector<double> x = S[0];
    double scale = std::max(1.0, S[0].squaredNorm());
    const double eps = std::numeric_limits<double>::epsilon();
    // Chain values carry relative noise well above eps; a tighter gap test
    // stalls in the tail without changing the rounded set.
    const double gap_tol_rel = std::max(options_.tolerance * options_.tolerance, 1e-12);

    result_.converged = false;
    for (Index it = 0; it < cap; ++it) {
      result_.iterations = it + 1;
      std::vector<Index> order(m_);
      std::iota(order.begin(), order.end(), Index(0));
      std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return x[a] < x[b]; });
      const Vector<double> q = vertex(order);
      scale = std::max(scale, q.squaredNorm());
      const double gap = x.squaredNorm() - x.dot(q);
      if (gap <= gap_tol_rel * scale) {
        result_.converged = true;
        break;
      }
      bool repeated = false;
      for (const auto& s : S) repeated = repeated || (s - q).squaredNorm() <= 64.0 * eps * scale;
      if (repeated) {
        // Numerically stalled: q is already in the corral.
        result_.converged = gap <= 1e3 * gap_tol_rel * scale;
        break;
      }
      S.push_back(q);
      lambda.push_back(0.0);

      const double before = x.squaredNorm();
      for (std::size_t minor = 0; minor <= S.size() + 1; ++minor) {
        Matrix<double> B(m_, static_cast<Index>(S.size()));
        for (std::size_t j = 0; j < S.size(); ++j) B.col(static_cast<Index>(j)) = S[j];
        const Vector<double> alpha = affine_minimizer(B);
        const double floor = 1e-12;
        if (alpha.minCoeff() > floor) {
          for (std::size_t j = 0; j < S.size(); ++j) lambda[j] = alpha[static_cast<Index>(j)];
          x = B * alpha;
          break;
        }
        double theta = 1.0;
        for (std::size_t j = 0; j < S.size(); ++j) {
          const double a = alpha[static_cast<Index>(j)];
          if (a <= floor && lambda[j] - a > 0.0) theta = std::min(theta, lambda[j] / (lambda[j] - a));
        }
        for (std::size_t j = 0; j < S.size(); ++j)
          lambda[j] = theta * alpha[static_cast<Index>(j)] + (1.0 - theta) * lambda[j];
        // Drop the points that left the convex hull, at least the most negative one.
        std::size_t worst = 0;
        for (std::size_t j = 1; j < S.size(); ++j)
          if (lambda[j] < lambda[worst]) worst = j;
        std::vector<Vector<double>> keep;
        std::vector<double> keep_lambda;
        for (std::size_t j = 0; j < S.size(); ++j) {
          if (j == worst || lambda[j] <= floor) continue;
          keep.push_back(S[j]);
          keep_lambda.push_back(lambda[j]);
        }
        if (keep.empty()) {
          keep.push_back(S.back());
          keep_lambda.push_back(1.0);
        }
        const double total = std::accumulate(keep_lambda.begin(), keep_lambda.end(), 0.0);
        for (double& l : keep_lambda) l /= total;
        S.swap(keep);
        lambda.swap(keep_lambda);
        x.setZero();
        for (std::size_t j = 0; j < S.size(); ++j) x += lambda[j] * S[j];
      }
      if (x.squaredNorm() > before * (1.0 + 1e-12) + 64.0 * eps * scale) break;
    }
    return x;
  }

  void round(const Vector<double>& x) {
    const double amb = options_.tolerance * (1.0 + x.cwiseAbs().maxCoeff());
    BinaryVector base(m_, 0);
    std::vector<Index> ambiguous;
    for (Index i = 0; i < m_; ++i) {
      if (x[i] < -amb) base[i] = 1;
      else if (x[i] <= amb) ambiguous.push_back(i);
    }
    if (static_cast<Index>(ambiguous.size()) <= options_.max_ambiguous) {
      const std::uint64_t count = std::uint64_t(1) << ambiguous.size();
      for (std::uint64_t mask = 0; mask < count; ++mask) {
        BinaryVector z = base;
        for (std::size_t k = 0; k < ambiguous.size(); ++k) z[ambiguous[k]] = (mask >> k) & 1;
        evaluate_candidate(z);
      }
    } else {
      evaluate_candidate(base);
    }

    // One-flip neighbors of the incumbent until none improves.
    for (Index pass = 0; pass < m_ + 1; ++pass) {
      bool moved = false;
      const BinaryVector center = result_.zstar;
      for (Index i = 0; i < m_; ++i) {
        BinaryVector z = center;
        z[i] ^= 1;
        const double v = oracle_.evaluate(z);
        ++result_.evaluations;
        if (v < result_.value - detail::tie_tolerance(result_.value)) {
          result_.value = v;
          result_.zstar = z;
          moved = true;
        }
      }
      if (!moved) break;
    }
  }

  void evaluate_candidate(const BinaryVector& z) {
    const double v = oracle_.evaluate(z);
    ++result_.evaluations;
    offer(v, z);
  }

  const SubmodularOracle& oracle_;
  MnpOptions options_;
  Index m_;
  SfmResult result_;
};

}  // namespace

SfmResult minimize_mnp(const SubmodularOracle& oracle, const MnpOptions& options) {
  if (!(options.tolerance > 0.0)) throw InputError("minimize_mnp: tolerance must be positive");
  return MnpSearch(oracle, options).run();
}

std::string to_string(Engine engine) { return engine == Engine::exhaustive ? "exhaustive" : "mnp"; }

Engine parse_engine(const std::string& text) {
  if (text == "exhaustive") return Engine::exhaustive;
  if (text == "mnp") return Engine::mnp;
  throw InputError("unknown engine '" + text + "' (expected exhaustive or mnp)");
}

Solution recover(const IndicatorProblem& problem, const SignSplitMap& map, const BinaryVector& zbin) {
  const auto [lo, hi] = bounds_for_binary(map, zbin, problem.lower, problem.upper);
  const BoxQpSolution<double> sol = boxqp::solve(problem.quad, lo, hi, unchecked());
  Solution out;
  out.x = sol.x;
  out.z = map.to_original(zbin);
  out.zbin = map.from_original(out.z, out.x);
  out.value = problem.objective(out.x, out.z);
  out.binary_dim = map.binary_dim();
  if (problem.mode == Mode::robust) {
    for (Index i = 0; i < problem.dimension(); ++i)
      if (problem.roles[i].role == VariableRole::slack_w && out.z[i]) out.discarded.push_back(problem.roles[i].vertex);
  }
  return out;
}

Solution solve_full(const IndicatorProblem& problem, const SolveOptions& options) {
  const SplitResult s = split(problem.lower, problem.upper, problem.costs);
  const ValueFunctionOracle values(problem.quad, problem.lower, problem.upper, s.map, options.chain);
  const CostedOracle costed(values, s.cost);

  std::vector<int> pins(s.map.binary_dim(), -1);
  if (options.pin_free_coordinates) {
    for (Index k = 0; k < s.map.binary_dim(); ++k) {
      if (s.cost.linear[k] != 0.0) continue;
      pins[k] = s.map.coordinates[k].side == SplitSide::plus ? 1 : 0;
    }
  }
  const RestrictedOracle restricted(costed, pins);

  SfmResult sfm = options.engine == Engine::exhaustive ? minimize_exhaustive(restricted)
                                                       : minimize_mnp(restricted, options.mnp);
  Solution out = recover(problem, s.map, restricted.expand(sfm.zstar));
  out.search_dim = restricted.dimension();
  out.sfm = std::move(sfm);
  return out;
}

}  // namespace subind

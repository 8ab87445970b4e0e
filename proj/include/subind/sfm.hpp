#ifndef SUBIND_SFM_HPP
#define SUBIND_SFM_HPP

#include "subind/lattice.hpp"
#include "subind/model.hpp"
#include "subind/pathtrace.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace subind {

/// Set function F on {0,1}^m.
class SubmodularOracle {
 public:
  virtual ~SubmodularOracle() = default;

  virtual Index dimension() const = 0;
  virtual double evaluate(const BinaryVector& z) const = 0;

  /// F of the prefixes of `order` (distinct coordinates): entry k switches on
  /// order[0..k). The default evaluates every prefix separately.
  virtual std::vector<double> chain(std::span<const Index> order) const;
};

class FunctionOracle final : public SubmodularOracle {
 public:
  FunctionOracle(Index m, std::function<double(const BinaryVector&)> fun) : m_(m), fun_(std::move(fun)) {}

  Index dimension() const override { return m_; }
  double evaluate(const BinaryVector& z) const override { return fun_(z); }

 private:
  Index m_;
  std::function<double(const BinaryVector&)> fun_;
};

enum class ChainMethod {
  path,   // parametric trace; needs finite bounds, else falls back to naive
  naive,  // one box QP per prefix
};

/// v(zbin) = min f over bounds_for_binary(zbin).
class ValueFunctionOracle final : public SubmodularOracle {
 public:
  ValueFunctionOracle(QuadraticForm<double> quad, Vector<double> lower, Vector<double> upper, SignSplitMap map,
                      ChainMethod method = ChainMethod::path);

  Index dimension() const override { return map_.binary_dim(); }
  double evaluate(const BinaryVector& zbin) const override;
  std::vector<double> chain(std::span<const Index> order) const override;

  /// Whether chain() runs the parametric trace.
  bool uses_path() const { return path_; }
  ValueChain<double> trace(std::span<const Index> order, const ChainOptions& options = {}) const;
  BoxQpSolution<double> minimizer(const BinaryVector& zbin) const;

  const QuadraticForm<double>& quad() const { return quad_; }
  const SignSplitMap& map() const { return map_; }

 private:
  QuadraticForm<double> quad_;
  Vector<double> lower_;
  Vector<double> upper_;
  SignSplitMap map_;
  bool path_;
};

/// inner + a linear binary cost.
class CostedOracle final : public SubmodularOracle {
 public:
  CostedOracle(const SubmodularOracle& inner, BinaryCost cost);

  Index dimension() const override { return inner_.dimension(); }
  double evaluate(const BinaryVector& z) const override;
  std::vector<double> chain(std::span<const Index> order) const override;

 private:
  const SubmodularOracle& inner_;
  BinaryCost cost_;
};

/// Restriction of `inner` to its unpinned coordinates. pins[k] is -1 for a
/// free coordinate, otherwise the value coordinate k is held at.
class RestrictedOracle final : public SubmodularOracle {
 public:
  RestrictedOracle(const SubmodularOracle& inner, std::vector<int> pins);

  Index dimension() const override { return static_cast<Index>(free_.size()); }
  double evaluate(const BinaryVector& z) const override;
  std::vector<double> chain(std::span<const Index> order) const override;

  BinaryVector expand(const BinaryVector& z) const;

 private:
  const SubmodularOracle& inner_;
  std::vector<int> pins_;
  std::vector<Index> free_;
  std::vector<Index> pinned_on_;
};

/// Indices sorted by value descending, ties by index ascending.
std::vector<Index> sort_nonincreasing(const Vector<double>& values);

struct GreedyMinorant {
  std::vector<Index> order;
  std::vector<double> chain;
  Vector<double> weights;  // w_order[k] = chain[k+1] - chain[k]
  double base = 0.0;       // F(0)

  double value(const Vector<double>& zfrac) const { return base + weights.dot(zfrac); }
};

/// Greedy base-polytope vertex for zfrac in [0,1]^m; value(zfrac) is the
/// Lovasz extension at zfrac.
GreedyMinorant greedy_subgradient(const SubmodularOracle& oracle, const Vector<double>& zfrac);

struct SfmResult {
  BinaryVector zstar;
  double value = 0.0;
  /// Norm of the final base-polytope point; empty for exhaustive search.
  std::optional<double> certificate;
  bool converged = true;
  Index iterations = 0;
  Index evaluations = 0;
  Index chains = 0;
};

inline constexpr Index kExhaustiveLimit = 20;

/// All 2^m points in lexicographic order (coordinate 0 most significant);
/// among values within 1e-9 (1 + |v|) the lexicographically smallest wins.
SfmResult minimize_exhaustive(const SubmodularOracle& oracle);

struct MnpOptions {
  double tolerance = 1e-8;
  Index max_iterations = -1;  // -1: 100 m + 1000
  Index max_ambiguous = 10;
};

/// Fujishige-Wolfe minimum-norm point over the base polytope, followed by
/// rounding: best prefix level set of every chain seen, enumeration of the
/// near-zero coordinates and a one-flip neighbor audit.
SfmResult minimize_mnp(const SubmodularOracle& oracle, const MnpOptions& options = {});

enum class Engine { exhaustive, mnp };

std::string to_string(Engine engine);
Engine parse_engine(const std::string& text);

struct SolveOptions {
  Engine engine = Engine::exhaustive;
  MnpOptions mnp;
  ChainMethod chain = ChainMethod::path;
  /// Hold zero-cost coordinates at their dominant value: on for z+ (the box
  /// only grows), off for z- (the box only shrinks).
  bool pin_free_coordinates = true;
};

struct Solution {
  BinaryVector z;     // original indicators
  BinaryVector zbin;  // split coordinates
  Vector<double> x;
  double value = 0.0;  // f(x) + c'z
  std::vector<Index> discarded;
  SfmResult sfm;
  Index binary_dim = 0;
  Index search_dim = 0;
};

Solution solve_full(const IndicatorProblem& problem, const SolveOptions& options = {});

/// Recovered solution for a fixed split vector: one box QP, then the split
/// is made sign-consistent with the minimizer.
Solution recover(const IndicatorProblem& problem, const SignSplitMap& map, const BinaryVector& zbin);

namespace detail {

double tie_tolerance(double value);
bool lex_less(const BinaryVector& a, const BinaryVector& b);
/// (value, z) beats (best_value, best_z) under the tie rule above.
bool improves(double value, const BinaryVector& z, double best_value, const BinaryVector& best_z);

}  // namespace detail

}  // namespace subind

#endif  // SUBIND_SFM_HPP

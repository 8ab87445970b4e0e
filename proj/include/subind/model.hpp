#ifndef SUBIND_MODEL_HPP
#define SUBIND_MODEL_HPP

#include "subind/common.hpp"
#include "subind/quadratic_form.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace subind {

struct Edge {
  Index i = 0;
  Index j = 0;
  double weight = 0.0;
};

/// Undirected weighted graph over vertices 0..num_vertices-1.
struct Graph {
  Index num_vertices = 0;
  std::vector<Edge> edges;

  /// Throws InputError on self-loops, duplicate edges, out-of-range vertices
  /// or negative weights.
  void validate() const;

  /// Weighted Laplacian L with x'Lx = sum_ij w_ij (x_i - x_j)^2.
  Matrix<double> laplacian() const;
};

enum class Mode { sparse, robust };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

/// MRF inference instance: quadratic fidelity node_weights_i (x_i - a_i)^2,
/// quadratic smoothing w_ij (x_i - x_j)^2 and one indicator cost per vertex.
struct ProblemInstance {
  Graph graph;
  Vector<double> observations;
  Vector<double> node_weights;
  Vector<double> costs;
  Vector<double> lower;
  Vector<double> upper;
  Mode mode = Mode::sparse;

  Index size() const { return graph.num_vertices; }
  void validate() const;
};

enum class VariableRole { signal, slack_w };

struct VariableInfo {
  VariableRole role = VariableRole::signal;
  Index vertex = 0;
};

/// min f(x) + c'z  s.t.  lower o z <= x <= upper o z,  z binary.
struct IndicatorProblem {
  QuadraticForm<double> quad;
  Vector<double> costs;
  Vector<double> lower;
  Vector<double> upper;
  std::vector<VariableInfo> roles;
  Mode mode = Mode::sparse;

  Index dimension() const { return quad.dimension(); }
  double objective(const Vector<double>& x, const BinaryVector& z) const;
  /// Whether (x, z) satisfies the indicator box, with absolute slack `tol`.
  bool feasible(const Vector<double>& x, const BinaryVector& z, double tol = 0.0) const;
};

inline constexpr double kDefaultRidge = 1e-8;

/// Q = 2 diag(node_weights) + 2 L_w, a = 2 node_weights o observations,
/// k0 = sum node_weights_i a_i^2.
IndicatorProblem compile_sparse(const ProblemInstance& inst);

/// Variables (x_1..x_n, w_1..w_n) for
///   sum nw_i (x_i - w_i - a_i)^2 + sum w_ij (x_i - x_j)^2 + ridge sum w_i^2.
/// x carries a zero-cost indicator with bounds [l, u]; w carries cost c with
/// bounds [-M, M] (see robust_box_radius).
IndicatorProblem compile_robust(const ProblemInstance& inst, double ridge = kDefaultRidge);

/// Dispatches on inst.mode.
IndicatorProblem compile(const ProblemInstance& inst, double ridge = kDefaultRidge);

/// M = 2 (max |a_i| + largest finite |l_i|, |u_i|) + 1.
double robust_box_radius(const ProblemInstance& inst);

/// Direct sum-form objective without indicator costs.
double sparse_fidelity(const ProblemInstance& inst, const Vector<double>& x);
double robust_fidelity(const ProblemInstance& inst, const Vector<double>& x, const Vector<double>& w,
                       double ridge);

enum class Topology { chain, grid2d, grid3d };

std::string to_string(Topology topology);
Topology parse_topology(const std::string& text);

/// Path, 2-D or 3-D grid with unit-spaced neighbors and uniform edge weight.
Graph make_topology(Topology topology, const std::vector<Index>& dims, double edge_weight = 1.0);

struct GeneratorConfig {
  Topology topology = Topology::chain;
  std::vector<Index> dims{10};
  double signal_sparsity = 0.5;
  double outlier_fraction = 0.0;
  double noise_sd = 0.1;
  std::uint64_t seed = 0;
  Mode mode = Mode::sparse;
  double edge_weight = 1.0;
  double node_weight = 1.0;
  double cost = 1.0;
  double signal_scale = 1.0;
  /// Gross outliers are shifted by outlier_scale * signal_scale.
  double outlier_scale = 10.0;
};

struct GroundTruth {
  Vector<double> x;
  std::vector<Index> outliers;
  std::uint64_t seed = 0;
};

struct GeneratedInstance {
  ProblemInstance instance;
  GroundTruth truth;
};

/// Deterministic for a fixed seed. round(sparsity n) vertices of the planted
/// signal are zero, the rest have magnitude in [0.5, 1.5] signal_scale with a
/// random sign; round(outlier_fraction n) observations are gross outliers.
/// Bounds are symmetric, +-(max |a_i| + 1) rounded up.
GeneratedInstance generate(const GeneratorConfig& config);

}  // namespace subind

#endif  // SUBIND_MODEL_HPP

#include "subind/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace subind {

namespace {

std::string at(const char* what, Index i) {
  std::ostringstream msg;
  msg << what << " at index " << i;
  return msg.str();
}

}  // namespace

void Graph::validate() const {
  if (num_vertices <= 0) throw InputError("graph must have at least one vertex");
  std::set<std::pair<Index, Index>> seen;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& edge = edges[e];
    if (edge.i < 0 || edge.i >= num_vertices || edge.j < 0 || edge.j >= num_vertices)
      throw InputError(at("edge endpoint out of range", static_cast<Index>(e)));
    if (edge.i == edge.j) throw InputError(at("self-loop", static_cast<Index>(e)));
    if (!(edge.weight >= 0.0) || !std::isfinite(edge.weight))
      throw InputError(at("negative or non-finite edge weight", static_cast<Index>(e)));
    const auto key = std::minmax(edge.i, edge.j);
    if (!seen.insert(key).second) throw InputError(at("duplicate edge", static_cast<Index>(e)));
  }
}

Matrix<double> Graph::laplacian() const {
  Matrix<double> L = Matrix<double>::Zero(num_vertices, num_vertices);
  for (const Edge& e : edges) {
    L(e.i, e.i) += e.weight;
    L(e.j, e.j) += e.weight;
    L(e.i, e.j) -= e.weight;
    L(e.j, e.i) -= e.weight;
  }
  return L;
}

std::string to_string(Mode mode) { return mode == Mode::sparse ? "sparse" : "robust"; }

Mode parse_mode(const std::string& text) {
  if (text == "sparse") return Mode::sparse;
  if (text == "robust") return Mode::robust;
  throw InputError("unknown mode '" + text + "' (expected sparse or robust)");
}

void ProblemInstance::validate() const {
  graph.validate();
  const Index n = graph.num_vertices;
  const auto check_size = [n](const Vector<double>& v, const char* name) {
    if (v.size() != n) throw InputError(std::string(name) + " must have one entry per vertex");
  };
  check_size(observations, "observations");
  check_size(node_weights, "node_weights");
  check_size(costs, "costs");
  check_size(lower, "lower bounds");
  check_size(upper, "upper bounds");
  for (Index i = 0; i < n; ++i) {
    if (!std::isfinite(observations[i])) throw InputError(at("non-finite observation", i));
    if (!(node_weights[i] > 0.0) || !std::isfinite(node_weights[i]))
      throw InputError(at("node weight must be positive", i));
    if (!(costs[i] >= 0.0) || !std::isfinite(costs[i])) throw InputError(at("cost must be nonnegative", i));
    if (std::isnan(lower[i]) || std::isnan(upper[i])) throw InputError(at("NaN bound", i));
    if (lower[i] == infinity<double>() || upper[i] == -infinity<double>())
      throw InputError(at("bound excludes every real value", i));
    if (!(lower[i] <= upper[i])) throw InputError(at("lower bound exceeds upper bound", i));
  }
}

double IndicatorProblem::objective(const Vector<double>& x, const BinaryVector& z) const {
  double total = quad.value(x);
  for (Index i = 0; i < costs.size(); ++i)
    if (z[i]) total += costs[i];
  return total;
}

bool IndicatorProblem::feasible(const Vector<double>& x, const BinaryVector& z, double tol) const {
  if (x.size() != dimension() || static_cast<Index>(z.size()) != dimension()) return false;
  for (Index i = 0; i < dimension(); ++i) {
    const double lo = z[i] ? lower[i] : 0.0;
    const double hi = z[i] ? upper[i] : 0.0;
    if (x[i] < lo - tol || x[i] > hi + tol) return false;
  }
  return true;
}

IndicatorProblem compile_sparse(const ProblemInstance& inst) {
  inst.validate();
  if (inst.mode != Mode::sparse) throw InputError("compile_sparse: instance is not in sparse mode");
  const Index n = inst.size();
  IndicatorProblem out;
  out.mode = Mode::sparse;
  out.quad.Q = 2.0 * inst.graph.laplacian();
  out.quad.Q.diagonal() += 2.0 * inst.node_weights;
  out.quad.a = 2.0 * inst.node_weights.cwiseProduct(inst.observations);
  out.quad.k0 = inst.node_weights.dot(inst.observations.cwiseAbs2());
  out.costs = inst.costs;
  out.lower = inst.lower;
  out.upper = inst.upper;
  out.roles.resize(n);
  for (Index i = 0; i < n; ++i) out.roles[i] = {VariableRole::signal, i};
  require_stieltjes(out.quad);
  return out;
}

double robust_box_radius(const ProblemInstance& inst) {
  double amax = 0.0, bmax = 0.0;
  for (Index i = 0; i < inst.size(); ++i) {
    amax = std::max(amax, std::abs(inst.observations[i]));
    if (std::isfinite(inst.lower[i])) bmax = std::max(bmax, std::abs(inst.lower[i]));
    if (std::isfinite(inst.upper[i])) bmax = std::max(bmax, std::abs(inst.upper[i]));
  }
  return 2.0 * (amax + bmax) + 1.0;
}

IndicatorProblem compile_robust(const ProblemInstance& inst, double ridge) {
  inst.validate();
  if (inst.mode != Mode::robust) throw InputError("compile_robust: instance is not in robust mode");
  if (!(ridge > 0.0) || !std::isfinite(ridge)) throw InputError("compile_robust: ridge must be positive");
  const Index n = inst.size();
  for (Index i = 0; i < n; ++i) {
    // x_i = 0 must stay admissible: its zero-cost indicator would otherwise
    // add the point 0 to a box that excludes it.
    if (inst.lower[i] > 0.0 || inst.upper[i] < 0.0)
      throw InputError(at("robust mode requires 0 within [l, u]", i));
  }
  const double M = robust_box_radius(inst);
  const Vector<double>& nw = inst.node_weights;

  IndicatorProblem out;
  out.mode = Mode::robust;
  Matrix<double>& Q = out.quad.Q;
  Q = Matrix<double>::Zero(2 * n, 2 * n);
  Q.topLeftCorner(n, n) = 2.0 * inst.graph.laplacian();
  Q.topLeftCorner(n, n).diagonal() += 2.0 * nw;
  Q.bottomRightCorner(n, n).diagonal() = 2.0 * nw.array() + 2.0 * ridge;
  Q.topRightCorner(n, n).diagonal() = -2.0 * nw;
  Q.bottomLeftCorner(n, n).diagonal() = -2.0 * nw;
  out.quad.a.resize(2 * n);
  out.quad.a.head(n) = 2.0 * nw.cwiseProduct(inst.observations);
  out.quad.a.tail(n) = -2.0 * nw.cwiseProduct(inst.observations);
  out.quad.k0 = nw.dot(inst.observations.cwiseAbs2());

  out.costs.resize(2 * n);
  out.costs.head(n).setZero();
  out.costs.tail(n) = inst.costs;
  out.lower.resize(2 * n);
  out.upper.resize(2 * n);
  out.lower.head(n) = inst.lower;
  out.upper.head(n) = inst.upper;
  out.lower.tail(n).setConstant(-M);
  out.upper.tail(n).setConstant(M);
  out.roles.resize(2 * n);
  for (Index i = 0; i < n; ++i) {
    out.roles[i] = {VariableRole::signal, i};
    out.roles[n + i] = {VariableRole::slack_w, i};
  }
  require_stieltjes(out.quad);
  return out;
}

IndicatorProblem compile(const ProblemInstance& inst, double ridge) {
  return inst.mode == Mode::sparse ? compile_sparse(inst) : compile_robust(inst, ridge);
}

double sparse_fidelity(const ProblemInstance& inst, const Vector<double>& x) {
  double total = 0.0;
  for (Index i = 0; i < inst.size(); ++i) {
    const double r = x[i] - inst.observations[i];
    total += inst.node_weights[i] * r * r;
  }
  for (const Edge& e : inst.graph.edges) {
    const double d = x[e.i] - x[e.j];
    total += e.weight * d * d;
  }
  return total;
}

double robust_fidelity(const ProblemInstance& inst, const Vector<double>& x, const Vector<double>& w,
                       double ridge) {
  double total = 0.0;
  for (Index i = 0; i < inst.size(); ++i) {
    const double r = x[i] - w[i] - inst.observations[i];
    total += inst.node_weights[i] * r * r + ridge * w[i] * w[i];
  }
  for (const Edge& e : inst.graph.edges) {
    const double d = x[e.i] - x[e.j];
    total += e.weight * d * d;
  }
  return total;
}

std::string to_string(Topology topology) {
  switch (topology) {
    case Topology::chain: return "chain";
    case Topology::grid2d: return "grid2d";
    case Topology::grid3d: return "grid3d";
  }
  return "chain";
}

Topology parse_topology(const std::string& text) {
  if (text == "chain") return Topology::chain;
  if (text == "grid2d") return Topology::grid2d;
  if (text == "grid3d") return Topology::grid3d;
  throw InputError("unknown topology '" + text + "' (expected chain, grid2d or grid3d)");
}

Graph make_topology(Topology topology, const std::vector<Index>& dims, double edge_weight) {
  const std::size_t want = topology == Topology::chain ? 1 : topology == Topology::grid2d ? 2 : 3;
  if (dims.size() != want) {
    std::ostringstream msg;
    msg << to_string(topology) << " topology needs " << want << " dimension(s), got " << dims.size();
    throw InputError(msg.str());
  }
  for (Index d : dims)
    if (d <= 0) throw InputError("topology dimensions must be positive");
  if (!(edge_weight >= 0.0)) throw InputError("edge weight must be nonnegative");

  std::vector<Index> extent = dims;
  extent.resize(3, 1);
  const Index nx = extent[0], ny = extent[1], nz = extent[2];
  const auto id = [&](Index x, Index y, Index z) { return x + nx * (y + ny * z); };
  Graph g;
  g.num_vertices = nx * ny * nz;
  for (Index z = 0; z < nz; ++z)
    for (Index y = 0; y < ny; ++y)
      for (Index x = 0; x < nx; ++x) {
        if (x + 1 < nx) g.edges.push_back({id(x, y, z), id(x + 1, y, z), edge_weight});
        if (y + 1 < ny) g.edges.push_back({id(x, y, z), id(x, y + 1, z), edge_weight});
        if (z + 1 < nz) g.edges.push_back({id(x, y, z), id(x, y, z + 1), edge_weight});
      }
  return g;
}

GeneratedInstance generate(const GeneratorConfig& config) {
  const auto fraction_ok = [](double f) { return f >= 0.0 && f <= 1.0; };
  if (!fraction_ok(config.signal_sparsity) || !fraction_ok(config.outlier_fraction))
    throw InputError("generate: fractions must lie in [0, 1]");
  if (!(config.noise_sd >= 0.0)) throw InputError("generate: noise_sd must be nonnegative");
  if (!(config.node_weight > 0.0)) throw InputError("generate: node weight must be positive");
  if (!(config.cost >= 0.0)) throw InputError("generate: cost must be nonnegative");

  GeneratedInstance out;
  ProblemInstance& inst = out.instance;
  inst.graph = make_topology(config.topology, config.dims, config.edge_weight);
  inst.mode = config.mode;
  const Index n = inst.graph.num_vertices;

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> magnitude(0.5, 1.5);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index(0));
  std::shuffle(perm.begin(), perm.end(), rng);
  const Index zeros = static_cast<Index>(std::llround(config.signal_sparsity * static_cast<double>(n)));
  Vector<double> truth = Vector<double>::Zero(n);
  for (Index k = zeros; k < n; ++k) {
    const double sign = coin(rng) ? 1.0 : -1.0;
    truth[perm[k]] = sign * config.signal_scale * magnitude(rng);
  }

  inst.observations = truth;
  for (Index i = 0; i < n; ++i) inst.observations[i] += config.noise_sd * noise(rng);

  std::shuffle(perm.begin(), perm.end(), rng);
  const Index outliers = static_cast<Index>(std::llround(config.outlier_fraction * static_cast<double>(n)));
  for (Index k = 0; k < outliers; ++k) {
    const double sign = coin(rng) ? 1.0 : -1.0;
    inst.observations[perm[k]] += sign * config.outlier_scale * config.signal_scale;
    out.truth.outliers.push_back(perm[k]);
  }
  std::sort(out.truth.outliers.begin(), out.truth.outliers.end());

  inst.node_weights = Vector<double>::Constant(n, config.node_weight);
  inst.costs = Vector<double>::Constant(n, config.cost);
  const double radius = std::ceil(inst.observations.cwiseAbs().maxCoeff() + 1.0);
  inst.lower = Vector<double>::Constant(n, -radius);
  inst.upper = Vector<double>::Constant(n, radius);

  out.truth.x = truth;
  out.truth.seed = config.seed;
  inst.validate();
  return out;
}

}  // namespace subind

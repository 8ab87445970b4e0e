#include "subind/oracle.hpp"

#include "subind/boxqp.hpp"
#include "subind/pathtrace.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace subind {

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::pair<double, double> sample_bounds(BoundRegime regime, std::mt19937_64& rng) {
  const auto nonnegative = [&] {
    const double lo = uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : uniform(rng, 0.0, 1.0);
    return std::pair{lo, lo + uniform(rng, 0.2, 2.5)};
  };
  const auto negative = [&] {
    const double hi = uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : -uniform(rng, 0.0, 1.0);
    return std::pair{hi - uniform(rng, 0.2, 2.5), hi};
  };
  switch (regime) {
    case BoundRegime::nonnegative: return nonnegative();
    case BoundRegime::negative: return negative();
    case BoundRegime::mixed: {
      const double pick = uniform(rng, 0.0, 1.0);
      if (pick < 0.25) return nonnegative();
      if (pick < 0.5) return negative();
      return std::pair{-uniform(rng, 0.2, 2.5), uniform(rng, 0.2, 2.5)};
    }
  }
  return nonnegative();
}

BoxQpOptions unchecked() {
  BoxQpOptions o;
  o.validate = false;
  return o;
}

bool nonnegative_bounds(const IndicatorProblem& p) { return (p.lower.array() >= 0.0).all(); }

CheckOutcome pass(io::Json details = io::Json::object()) { return {true, false, "", std::move(details)}; }
CheckOutcome fail(std::string message, io::Json details = io::Json::object()) {
  return {false, false, std::move(message), std::move(details)};
}
CheckOutcome skip(std::string why) { return {true, true, std::move(why), io::Json::object()}; }

std::vector<Index> random_order(Index m, std::mt19937_64& rng) {
  std::vector<Index> order = natural_order(m);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

CheckOutcome check_stieltjes(const IndicatorProblem& p) {
  if (const auto why = stieltjes_violation(p.quad.Q)) return fail(*why);
  return pass();
}

CheckOutcome check_boxqp(const IndicatorProblem& p, std::mt19937_64& rng) {
  const Index n = p.dimension();
  for (int round = 0; round < 3; ++round) {
    BinaryVector z(n, 1);
    if (round > 0)
      for (auto& b : z) b = uniform(rng, 0.0, 1.0) < 0.5;
    Vector<double> lo(n), hi(n);
    for (Index i = 0; i < n; ++i) {
      lo[i] = scale_bound(p.lower[i], z[i] != 0);
      hi[i] = scale_bound(p.upper[i], z[i] != 0);
    }
    const auto sol = boxqp::solve(p.quad, lo, hi, unchecked());
    const double residual = boxqp::kkt_residual(p.quad, lo, hi, sol.x, sol.partition);
    const double tol = boxqp::kkt_tolerance(p.quad);
    if (!(residual <= tol)) {
      return fail("KKT residual exceeds tolerance",
                  {{"z", io::binary_to_json(z)}, {"residual", residual}, {"tolerance", tol}});
    }
  }
  return pass();
}

constexpr Index kSubmodularityLimit = 10;

CheckOutcome check_submodularity(const IndicatorProblem& p) {
  const SplitResult s = split(p.lower, p.upper, p.costs);
  if (s.map.binary_dim() > kSubmodularityLimit) return skip("binary dimension above the pairwise-check limit");
  const ValueFunctionOracle v(p.quad, p.lower, p.upper, s.map);
  const auto w = check_set_function_submodular([&](const BinaryVector& z) { return v.evaluate(z); },
                                               s.map.binary_dim(), 1e-8);
  if (w) {
    return fail("zeroth-order submodular inequality violated",
                {{"first", io::binary_to_json(w->first)},
                 {"second", io::binary_to_json(w->second)},
                 {"lhs", w->lhs},
                 {"rhs", w->rhs}});
  }
  return pass({{"binary_dim", s.map.binary_dim()}});
}

struct TracedChain {
  SplitResult split;
  ValueChain<double> chain;
};

std::optional<TracedChain> trace_random_chain(const IndicatorProblem& p, std::mt19937_64& rng) {
  if (!p.lower.allFinite() || !p.upper.allFinite()) return std::nullopt;
  TracedChain t{split(p.lower, p.upper, p.costs), {}};
  const auto order = random_order(t.split.map.binary_dim(), rng);
  ChainOptions opts;
  opts.record_iterates = true;
  opts.audit = true;
  t.chain = chain_split(p.quad, p.lower, p.upper, t.split.map, order, opts);
  return t;
}

CheckOutcome check_chain(const IndicatorProblem& p, std::mt19937_64& rng) {
  const auto t = trace_random_chain(p, rng);
  if (!t) return skip("infinite bounds");
  const auto& order = t->chain.order;
  BinaryVector z(order.size(), 0);
  double worst = 0.0;
  for (std::size_t k = 0; k <= order.size(); ++k) {
    if (k > 0) z[order[k - 1]] = 1;
    const double expect = boxqp::value_function(p.quad, p.lower, p.upper, t->split.map, z, unchecked());
    const double gap = std::abs(t->chain.values[k] - expect);
    worst = std::max(worst, gap);
    if (!(gap <= 1e-8)) {
      return fail("chain value differs from the box QP",
                  {{"order", order}, {"stage", k}, {"chain", t->chain.values[k]}, {"boxqp", expect}});
    }
  }
  return pass({{"max_gap", worst}});
}

CheckOutcome check_breakpoints(const IndicatorProblem& p, std::mt19937_64& rng) {
  const auto t = trace_random_chain(p, rng);
  if (!t) return skip("infinite bounds");
  const Index n = p.dimension();
  const Index budget = nonnegative_bounds(p) ? 2 * n : 4 * n;
  const Index count = static_cast<Index>(t->chain.breakpoints.size());
  if (count > budget)
    return fail("breakpoint budget exceeded", {{"order", t->chain.order}, {"count", count}, {"budget", budget}});
  return pass({{"count", count}, {"budget", budget}});
}

CheckOutcome check_monotone(const IndicatorProblem& p, std::mt19937_64& rng) {
  const auto t = trace_random_chain(p, rng);
  if (!t) return skip("infinite bounds");
  const auto& samples = t->chain.samples;
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const Vector<double> step = samples[k].x - samples[k - 1].x;
    Index i = 0;
    const double drop = step.minCoeff(&i);
    if (drop < -1e-10) {
      return fail("iterate decreased along the path",
                  {{"order", t->chain.order}, {"sample", k}, {"variable", i}, {"decrease", -drop}});
    }
  }
  return pass({{"samples", samples.size()}});
}

CheckOutcome check_lovasz(const IndicatorProblem& p, std::mt19937_64& rng) {
  const SplitResult s = split(p.lower, p.upper, p.costs);
  const ValueFunctionOracle v(p.quad, p.lower, p.upper, s.map);
  const Index m = s.map.binary_dim();
  const auto random_point = [&] {
    return Vector<double>(Vector<double>::NullaryExpr(m, [&] { return uniform(rng, 0.0, 1.0); }));
  };
  const auto extension = [&](const Vector<double>& z) { return greedy_subgradient(v, z).value(z); };
  for (int probe = 0; probe < 5; ++probe) {
    // vertices: every prefix set of a chain
    const GreedyMinorant g = greedy_subgradient(v, random_point());
    Vector<double> indicator = Vector<double>::Zero(m);
    for (Index k = 0; k <= m; ++k) {
      if (k > 0) indicator[g.order[k - 1]] = 1.0;
      const double at_vertex = g.value(indicator);
      if (std::abs(at_vertex - g.chain[k]) > 1e-8 * (1.0 + std::abs(g.chain[k])))
        return fail("extension differs from the set function at a vertex", {{"order", g.order}, {"prefix", k}});
    }
    const Vector<double> z1 = random_point(), z2 = random_point();
    const double lambda = uniform(rng, 0.0, 1.0);
    const Vector<double> mid = lambda * z1 + (1.0 - lambda) * z2;
    const double lhs = extension(mid);
    const double rhs = lambda * extension(z1) + (1.0 - lambda) * extension(z2);
    if (lhs > rhs + 1e-8) {
      return fail("extension is not convex along a segment",
                  {{"z1", io::vector_to_json(z1)}, {"z2", io::vector_to_json(z2)}, {"lambda", lambda}, {"lhs", lhs},
                   {"rhs", rhs}});
    }
  }
  return pass();
}

constexpr Index kExactnessVariables = 10;
constexpr Index kExactnessSearch = 16;

CheckOutcome check_exactness(const IndicatorProblem& p) {
  if (p.dimension() > kExactnessVariables) return skip("too many variables for brute force");
  SolveOptions opts;
  const SplitResult s = split(p.lower, p.upper, p.costs);
  Index search = 0;
  for (Index k = 0; k < s.map.binary_dim(); ++k) search += s.cost.linear[k] != 0.0;
  const Solution exact = brute_force(p);
  io::Json details{{"brute_force", exact.value}};
  if (search <= kExactnessSearch) {
    opts.engine = Engine::exhaustive;
    const Solution ex = solve_full(p, opts);
    details["exhaustive"] = ex.value;
    if (std::abs(ex.value - exact.value) > 1e-6) return fail("exhaustive engine misses the optimum", details);
  }
  opts.engine = Engine::mnp;
  const Solution mnp = solve_full(p, opts);
  details["mnp"] = mnp.value;
  if (std::abs(mnp.value - exact.value) > 1e-6) return fail("minimum-norm-point engine misses the optimum", details);
  return pass(details);
}

CheckOutcome check_recovery(const IndicatorProblem& p) {
  SolveOptions opts;
  opts.engine = Engine::mnp;
  const Solution sol = solve_full(p, opts);
  const double direct = p.objective(sol.x, sol.z);
  if (std::abs(direct - sol.sfm.value) > 1e-8 * (1.0 + std::abs(direct)))
    return fail("reported value differs from f(x) + c'z", {{"reported", sol.sfm.value}, {"recomputed", direct}});
  if (!p.feasible(sol.x, sol.z, 1e-12))
    return fail("recovered x violates the indicator bounds", {{"x", io::vector_to_json(sol.x)}});
  return pass({{"value", direct}});
}

}  // namespace

std::string to_string(BoundRegime regime) {
  switch (regime) {
    case BoundRegime::nonnegative: return "nonnegative";
    case BoundRegime::mixed: return "mixed";
    case BoundRegime::negative: return "negative";
  }
  return "mixed";
}

BoundRegime parse_regime(const std::string& text) {
  if (text == "nonnegative") return BoundRegime::nonnegative;
  if (text == "mixed") return BoundRegime::mixed;
  if (text == "negative") return BoundRegime::negative;
  throw InputError("unknown regime '" + text + "' (expected nonnegative, mixed or negative)");
}

IndicatorProblem InstanceSampler::sample(std::uint64_t trial) const {
  if (n <= 0) throw InputError("InstanceSampler: n must be positive");
  if (!(density >= 0.0 && density <= 1.0)) throw InputError("InstanceSampler: density must lie in [0, 1]");
  auto rng = make_rng(seed, trial);
  IndicatorProblem p;
  p.mode = Mode::sparse;
  Matrix<double>& Q = p.quad.Q;
  Q = Matrix<double>::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (uniform(rng, 0.0, 1.0) < density) {
        const double w = uniform(rng, 0.1, 1.0);
        Q(i, j) -= w;
        Q(j, i) -= w;
        Q(i, i) += w;
        Q(j, j) += w;
      }
  for (Index i = 0; i < n; ++i) Q(i, i) += 1e-3 + uniform(rng, 0.0, 1.0);
  if (n >= 2 && uniform(rng, 0.0, 1.0) < adversarial_rate) Q(0, 1) = Q(1, 0) = 0.5;
  p.quad.a.resize(n);
  for (Index i = 0; i < n; ++i) p.quad.a[i] = uniform(rng, -3.0, 3.0);
  p.lower.resize(n);
  p.upper.resize(n);
  p.costs.resize(n);
  for (Index i = 0; i < n; ++i) {
    std::tie(p.lower[i], p.upper[i]) = sample_bounds(regime, rng);
    p.costs[i] = uniform(rng, 0.0, cost_scale);
  }
  p.roles.resize(n);
  for (Index i = 0; i < n; ++i) p.roles[i] = {VariableRole::signal, i};
  return p;
}

ProblemInstance InstanceSampler::sample_instance(std::uint64_t trial, Mode mode) const {
  if (n <= 0) throw InputError("InstanceSampler: n must be positive");
  auto rng = make_rng(seed, trial ^ 0x9e3779b97f4a7c15ULL);
  ProblemInstance inst;
  inst.mode = mode;
  inst.graph.num_vertices = n;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (uniform(rng, 0.0, 1.0) < density) inst.graph.edges.push_back({i, j, uniform(rng, 0.1, 1.0)});
  inst.observations.resize(n);
  inst.node_weights.resize(n);
  inst.costs.resize(n);
  inst.lower.resize(n);
  inst.upper.resize(n);
  for (Index i = 0; i < n; ++i) {
    inst.node_weights[i] = uniform(rng, 0.5, 1.5);
    inst.observations[i] = uniform(rng, -2.0, 2.0);
    if (mode == Mode::robust && uniform(rng, 0.0, 1.0) < 0.2)
      inst.observations[i] += (uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0) * uniform(rng, 4.0, 8.0);
    inst.costs[i] = uniform(rng, 0.05, std::max(0.05, cost_scale));
    if (mode == Mode::sparse) {
      std::tie(inst.lower[i], inst.upper[i]) = sample_bounds(regime, rng);
    } else {
      const double width = uniform(rng, 1.0, 4.0);
      switch (regime) {
        case BoundRegime::nonnegative: inst.lower[i] = 0.0, inst.upper[i] = width; break;
        case BoundRegime::negative: inst.lower[i] = -width, inst.upper[i] = 0.0; break;
        case BoundRegime::mixed: inst.lower[i] = -width, inst.upper[i] = uniform(rng, 1.0, 4.0); break;
      }
    }
  }
  inst.validate();
  return inst;
}

Solution brute_force(const IndicatorProblem& problem) {
  const Index n = problem.dimension();
  if (n > kBruteForceLimit) {
    std::ostringstream msg;
    msg << "brute_force: " << n << " variables exceed the limit of " << kBruteForceLimit;
    throw InputError(msg.str());
  }
  require_stieltjes(problem.quad);
  Solution best;
  BinaryVector z(n, 0);
  Vector<double> lo(n), hi(n);
  const std::uint64_t count = std::uint64_t(1) << n;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    for (Index k = 0; k < n; ++k) {
      z[k] = (mask >> (n - 1 - k)) & 1;
      lo[k] = scale_bound(problem.lower[k], z[k] != 0);
      hi[k] = scale_bound(problem.upper[k], z[k] != 0);
    }
    const auto sol = boxqp::solve(problem.quad, lo, hi, unchecked());
    const double value = problem.objective(sol.x, z);
    ++best.sfm.evaluations;
    if (mask == 0 || value < best.value - detail::tie_tolerance(best.value)) {
      best.value = value;
      best.z = z;
      best.x = sol.x;
    }
  }
  const SplitResult s = split(problem.lower, problem.upper, problem.costs);
  best.zbin = s.map.from_original(best.z, best.x);
  best.binary_dim = s.map.binary_dim();
  best.search_dim = n;
  best.sfm.zstar = best.z;
  best.sfm.value = best.value;
  if (problem.mode == Mode::robust) {
    for (Index i = 0; i < n; ++i)
      if (problem.roles[i].role == VariableRole::slack_w && best.z[i]) best.discarded.push_back(problem.roles[i].vertex);
  }
  return best;
}

std::string to_string(Check check) {
  switch (check) {
    case Check::stieltjes: return "stieltjes";
    case Check::boxqp_kkt: return "boxqp_kkt";
    case Check::submodularity: return "submodularity";
    case Check::chain_vs_boxqp: return "chain_vs_boxqp";
    case Check::breakpoint_budget: return "breakpoint_budget";
    case Check::monotone_path: return "monotone_path";
    case Check::lovasz: return "lovasz";
    case Check::exactness: return "exactness";
    case Check::recovery: return "recovery";
  }
  return "unknown";
}

const std::vector<Check>& all_checks() {
  static const std::vector<Check> checks{Check::stieltjes,     Check::boxqp_kkt,         Check::submodularity,
                                         Check::chain_vs_boxqp, Check::breakpoint_budget, Check::monotone_path,
                                         Check::lovasz,         Check::exactness,         Check::recovery};
  return checks;
}

Check parse_check(const std::string& text) {
  for (Check c : all_checks())
    if (to_string(c) == text) return c;
  throw InputError("unknown check '" + text + "'");
}

CheckOutcome run_check(Check check, const IndicatorProblem& problem, std::uint64_t seed) {
  auto rng = make_rng(seed, static_cast<std::uint64_t>(check));
  try {
    switch (check) {
      case Check::stieltjes: return check_stieltjes(problem);
      case Check::boxqp_kkt: return check_boxqp(problem, rng);
      case Check::submodularity: return check_submodularity(problem);
      case Check::chain_vs_boxqp: return check_chain(problem, rng);
      case Check::breakpoint_budget: return check_breakpoints(problem, rng);
      case Check::monotone_path: return check_monotone(problem, rng);
      case Check::lovasz: return check_lovasz(problem, rng);
      case Check::exactness: return check_exactness(problem);
      case Check::recovery: return check_recovery(problem);
    }
  } catch (const std::exception& e) {
    return fail(std::string("exception: ") + e.what());
  }
  return fail("unknown check");
}

io::Json make_witness(Check check, const IndicatorProblem& problem, std::uint64_t seed, const CheckOutcome& outcome) {
  return io::Json{{"check", to_string(check)},
                  {"seed", seed},
                  {"message", outcome.message},
                  {"details", outcome.details},
                  {"problem", io::problem_to_json(problem)}};
}

CheckOutcome replay_witness(const io::Json& witness) {
  io::reject_unknown_keys(witness, {"check", "seed", "message", "details", "problem"}, "witness");
  if (!witness.contains("check") || !witness["check"].is_string()) throw InputError("witness: missing check name");
  if (!witness.contains("seed") || !witness["seed"].is_number_unsigned())
    throw InputError("witness: missing unsigned seed");
  if (!witness.contains("problem")) throw InputError("witness: missing problem");
  const Check check = parse_check(witness["check"].get<std::string>());
  return run_check(check, io::problem_from_json(witness["problem"]), witness["seed"].get<std::uint64_t>());
}

bool PropertyReport::all_passed() const {
  return std::all_of(tallies.begin(), tallies.end(), [](const CheckTally& t) { return t.failed == 0; });
}

io::Json PropertyReport::to_json() const {
  io::Json checks = io::Json::array();
  for (const CheckTally& t : tallies) {
    io::Json entry{{"name", to_string(t.check)}, {"passed", t.passed}, {"failed", t.failed}, {"skipped", t.skipped}};
    entry["witness"] = t.witness ? *t.witness : io::Json(nullptr);
    checks.push_back(entry);
  }
  return io::Json{{"seed", seed}, {"trials", trials}, {"all_passed", all_passed()}, {"checks", checks}};
}

PropertyReport run_property_suite(const InstanceSampler& sampler, Index trials) {
  if (trials < 1) throw InputError("run_property_suite: trials must be at least 1");
  PropertyReport report;
  report.seed = sampler.seed;
  report.trials = trials;
  for (Check c : all_checks()) report.tallies.push_back({c, 0, 0, 0, std::nullopt});
  for (Index t = 0; t < trials; ++t) {
    const IndicatorProblem problem = sampler.sample(static_cast<std::uint64_t>(t));
    const std::uint64_t check_seed = sampler.seed * 1000003ULL + static_cast<std::uint64_t>(t);
    bool stieltjes_ok = true;
    for (CheckTally& tally : report.tallies) {
      if (!stieltjes_ok) {
        ++tally.skipped;
        continue;
      }
      const CheckOutcome outcome = run_check(tally.check, problem, check_seed);
      if (outcome.skipped) {
        ++tally.skipped;
      } else if (outcome.passed) {
        ++tally.passed;
      } else {
        ++tally.failed;
        if (!tally.witness) tally.witness = make_witness(tally.check, problem, check_seed, outcome);
        if (tally.check == Check::stieltjes) stieltjes_ok = false;
      }
    }
  }
  return report;
}

}  // namespace subind

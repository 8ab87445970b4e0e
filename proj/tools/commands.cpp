#include "commands.hpp"

#include "bench.hpp"

#include "subind/boxqp.hpp"
#include "subind/io.hpp"
#include "subind/oracle.hpp"
#include "subind/pathtrace.hpp"
#include "subind/sfm.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace subind::cli {

namespace {

using io::Json;

struct Loaded {
  IndicatorProblem problem;
  std::optional<ProblemInstance> instance;
};

// An MRF instance is compiled; a file with "Q" is taken as an already compiled problem.
Loaded load_problem(const std::string& path, double ridge) {
  const Json json = io::read_json(path);
  Loaded out;
  if (json.is_object() && json.contains("Q")) {
    out.problem = io::problem_from_json(json);
  } else {
    out.instance = io::instance_from_json(json);
    out.problem = compile(*out.instance, ridge);
  }
  return out;
}

void write_output(const std::string& path, const Json& json) {
  if (!path.empty()) io::write_json(path, json);
}

std::string format_binary(const BinaryVector& z) {
  std::ostringstream s;
  s << '[';
  for (std::size_t k = 0; k < z.size(); ++k) s << (k ? "," : "") << int(z[k]);
  s << ']';
  return s.str();
}

std::string format_value(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

// Robust problems report per-vertex discard flags, signal and slack; sparse
// ones report the indicator and x vectors as they are.
Json solution_to_json(const IndicatorProblem& p, const Solution& sol) {
  Json out;
  if (p.mode == Mode::robust) {
    Index vertices = 0;
    for (const auto& r : p.roles) vertices = std::max(vertices, r.vertex + 1);
    Vector<double> x = Vector<double>::Zero(vertices), w = Vector<double>::Zero(vertices);
    BinaryVector z(vertices, 0);
    for (Index i = 0; i < p.dimension(); ++i) {
      const auto& r = p.roles[i];
      if (r.role == VariableRole::signal) {
        x[r.vertex] = sol.x[i];
      } else {
        w[r.vertex] = sol.x[i];
        z[r.vertex] = sol.z[i];
      }
    }
    out["z"] = io::binary_to_json(z);
    out["x"] = io::vector_to_json(x);
    out["w"] = io::vector_to_json(w);
    out["discarded"] = sol.discarded;
  } else {
    out["z"] = io::binary_to_json(sol.z);
    out["x"] = io::vector_to_json(sol.x);
  }
  out["value"] = sol.value;
  return out;
}

struct GenerateArgs {
  std::string topology = "chain";
  std::vector<Index> dims{10};
  double sparsity = 0.5;
  double outliers = 0.0;
  double noise = 0.1;
  std::uint64_t seed = 0;
  std::string mode = "sparse";
  double cost = 1.0;
  double edge_weight = 1.0;
  double node_weight = 1.0;
  std::string output;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  GeneratorConfig cfg;
  cfg.topology = parse_topology(a.topology);
  cfg.dims = a.dims;
  cfg.signal_sparsity = a.sparsity;
  cfg.outlier_fraction = a.outliers;
  cfg.noise_sd = a.noise;
  cfg.seed = a.seed;
  cfg.mode = parse_mode(a.mode);
  cfg.cost = a.cost;
  cfg.edge_weight = a.edge_weight;
  cfg.node_weight = a.node_weight;
  const GeneratedInstance g = generate(cfg);
  io::write_instance(a.output, g.instance);
  Json truth = io::truth_to_json(g.truth);
  truth["topology"] = a.topology;
  truth["dims"] = a.dims;
  io::write_json(io::truth_path(a.output), truth);
  out << "generated " << a.mode << ' ' << a.topology << " instance with " << g.instance.size() << " vertices, "
      << g.truth.outliers.size() << " outliers, seed " << a.seed << " -> " << a.output << '\n';
  return kSuccess;
}

struct SolveArgs {
  std::string input;
  std::string output;
  std::string engine = "exhaustive";
  double tol = 1e-8;
  double ridge = kDefaultRidge;
};

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const Loaded loaded = load_problem(a.input, a.ridge);
  SolveOptions opts;
  opts.engine = parse_engine(a.engine);
  opts.mnp.tolerance = a.tol;
  const auto start = std::chrono::steady_clock::now();
  const Solution sol = solve_full(loaded.problem, opts);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  Json json = solution_to_json(loaded.problem, sol);
  json["engine"] = a.engine;
  json["certificate"] = sol.sfm.certificate ? Json(*sol.sfm.certificate) : Json("exhaustive");
  json["converged"] = sol.sfm.converged;
  json["iterations"] = sol.sfm.iterations;
  json["binary_dim"] = sol.binary_dim;
  json["search_dim"] = sol.search_dim;
  json["wall_time_ms"] = ms;
  write_output(a.output, json);

  out << "value " << format_value(sol.value);
  if (loaded.problem.mode == Mode::robust) {
    out << " discarded=[";
    for (std::size_t k = 0; k < sol.discarded.size(); ++k) out << (k ? "," : "") << sol.discarded[k];
    out << "]";
  } else {
    out << " z=" << format_binary(sol.z);
  }
  out << " engine " << a.engine << '\n';
  if (!sol.sfm.converged) out << "warning: minimum-norm-point iteration cap reached; best point found reported\n";
  return kSuccess;
}

struct EvalArgs {
  std::string input;
  std::string output;
  std::vector<int> z;
  double ridge = kDefaultRidge;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const Loaded loaded = load_problem(a.input, a.ridge);
  const IndicatorProblem& p = loaded.problem;
  // Robust problems take one discard flag per vertex; the signal indicators stay on.
  BinaryVector z(p.dimension(), 0);
  Index expected = p.dimension();
  if (p.mode == Mode::robust) {
    expected = 0;
    for (const auto& r : p.roles) expected += r.role == VariableRole::slack_w;
  }
  if (static_cast<Index>(a.z.size()) != expected) {
    std::ostringstream msg;
    msg << "--z needs " << expected << " entries, got " << a.z.size();
    throw InputError(msg.str());
  }
  for (int b : a.z)
    if (b != 0 && b != 1) throw InputError("--z entries must be 0 or 1");
  for (Index i = 0; i < p.dimension(); ++i) {
    const auto& r = p.roles[i];
    if (p.mode == Mode::robust)
      z[i] = r.role == VariableRole::signal ? 1 : static_cast<std::uint8_t>(a.z[r.vertex]);
    else
      z[i] = static_cast<std::uint8_t>(a.z[i]);
  }
  Vector<double> lo(p.dimension()), hi(p.dimension());
  for (Index i = 0; i < p.dimension(); ++i) {
    lo[i] = scale_bound(p.lower[i], z[i] != 0);
    hi[i] = scale_bound(p.upper[i], z[i] != 0);
  }
  const auto sol = boxqp::solve(p.quad, lo, hi);
  const double objective = p.objective(sol.x, z);
  write_output(a.output, Json{{"z", a.z},
                              {"value", sol.value},
                              {"objective", objective},
                              {"x", io::vector_to_json(sol.x)},
                              {"kkt_residual", sol.kkt_residual}});
  out << "v(z) = " << format_value(sol.value) << ", with indicator costs " << format_value(objective) << '\n';
  return kSuccess;
}

struct TraceArgs {
  std::string input;
  std::string output;
  std::vector<Index> order;
  double ridge = kDefaultRidge;
};

int cmd_trace(const TraceArgs& a, std::ostream& out) {
  const Loaded loaded = load_problem(a.input, a.ridge);
  const IndicatorProblem& p = loaded.problem;
  const SplitResult s = split(p.lower, p.upper, p.costs);
  const std::vector<Index> order = a.order.empty() ? natural_order(s.map.binary_dim()) : a.order;
  const ValueChain<double> chain = chain_split(p.quad, p.lower, p.upper, s.map, order);

  Json coords = Json::array();
  for (const auto& c : s.map.coordinates)
    coords.push_back({{"variable", c.variable}, {"side", c.side == SplitSide::plus ? "plus" : "minus"}});
  Json bps = Json::array();
  for (const auto& b : chain.breakpoints)
    bps.push_back({{"stage", b.stage}, {"x", b.parameter}, {"index", b.index}, {"event", std::string(to_string(b.event))}});
  write_output(a.output, Json{{"order", chain.order},
                              {"coordinates", coords},
                              {"values", chain.values},
                              {"breakpoints", bps},
                              {"minimizer", io::vector_to_json(chain.minimizers.back())}});
  out << "chain of " << order.size() << " stages, " << chain.breakpoints.size() << " breakpoints, v(0) = "
      << format_value(chain.values.front()) << ", v(1) = " << format_value(chain.values.back()) << '\n';
  return kSuccess;
}

struct VerifyArgs {
  Index trials = 100;
  Index n = 8;
  std::string regime = "mixed";
  std::uint64_t seed = 0;
  double density = 0.5;
  std::string output;
  std::string witness_dir;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  InstanceSampler sampler;
  sampler.n = a.n;
  sampler.regime = parse_regime(a.regime);
  sampler.seed = a.seed;
  sampler.density = a.density;
  const PropertyReport report = run_property_suite(sampler, a.trials);
  write_output(a.output, report.to_json());
  if (!a.witness_dir.empty()) {
    std::filesystem::create_directories(a.witness_dir);
    for (const auto& t : report.tallies)
      if (t.witness) io::write_json(std::filesystem::path(a.witness_dir) / (to_string(t.check) + ".json"), *t.witness);
  }
  Index failed = 0;
  std::string first;
  for (const auto& t : report.tallies) {
    if (t.failed > 0 && first.empty()) first = to_string(t.check);
    failed += t.failed;
  }
  if (failed == 0) {
    out << "verify: " << report.tallies.size() << " checks over " << a.trials << " trials (" << a.regime
        << ", n=" << a.n << ", seed " << a.seed << "): all passed\n";
    return kSuccess;
  }
  out << "verify: " << failed << " failures, first in " << first << '\n';
  return kVerificationFailure;
}

struct BenchArgs {
  std::vector<Index> sizes{100, 200, 400};
  int reps = 3;
  std::uint64_t seed = 0;
  std::string output;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const std::vector<BenchRow> rows = run_bench(a.sizes, a.reps, a.seed);
  const std::string csv = bench_csv(rows);
  if (!a.output.empty()) {
    std::ofstream file(a.output);
    if (!file) throw InputError("cannot write " + a.output);
    file << csv;
  }
  out << "bench:";
  for (const auto& r : rows) out << " n=" << r.n << " chain " << format_value(r.t_chain_ms) << "ms";
  if (rows.size() >= 2) {
    const auto& x = rows[rows.size() - 2];
    const auto& y = rows.back();
    out << "; last doubling ratio chain " << format_value(y.t_chain_ms / x.t_chain_ms) << ", naive "
        << format_value(y.t_naive_ms / x.t_naive_ms);
  }
  out << '\n';
  return kSuccess;
}

struct CheckArgs {
  std::string input;
  std::string witness;
  std::string output;
  double ridge = kDefaultRidge;
};

int cmd_check(const CheckArgs& a, std::ostream& out) {
  if (!a.witness.empty()) {
    const Json w = io::read_json(a.witness);
    const CheckOutcome outcome = replay_witness(w);
    write_output(a.output, Json{{"check", w.value("check", "")},
                                {"passed", outcome.passed},
                                {"message", outcome.message},
                                {"details", outcome.details}});
    out << "check " << w.value("check", "") << ": " << (outcome.passed ? "passed" : "failed: " + outcome.message)
        << '\n';
    return outcome.passed ? kSuccess : kVerificationFailure;
  }
  const Loaded loaded = load_problem(a.input, a.ridge);
  const IndicatorProblem& p = loaded.problem;
  Json report;
  bool ok = true;
  if (const auto w = check_submodular_second(p.quad.Q)) {
    ok = false;
    report["second_order"] = {{"i", w->i}, {"j", w->j}, {"value", w->value}};
  }
  const SplitResult s = split(p.lower, p.upper, p.costs);
  if (s.map.binary_dim() > 16) throw InputError("check: binary dimension above 16 is too large for the pairwise test");
  const ValueFunctionOracle v(p.quad, p.lower, p.upper, s.map);
  if (const auto w = check_set_function_submodular([&](const BinaryVector& z) { return v.evaluate(z); },
                                                   s.map.binary_dim())) {
    ok = false;
    report["zeroth_order"] = {{"first", io::binary_to_json(w->first)},
                              {"second", io::binary_to_json(w->second)},
                              {"lhs", w->lhs},
                              {"rhs", w->rhs}};
  }
  report["binary_dim"] = s.map.binary_dim();
  report["submodular"] = ok;
  write_output(a.output, report);
  out << "check: value function over " << s.map.binary_dim() << " split coordinates is "
      << (ok ? "submodular" : "NOT submodular") << '\n';
  return ok ? kSuccess : kVerificationFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact solver for convex quadratic problems with indicator variables"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a random MRF instance and its planted truth");
  g->add_option("--topology", gen.topology)->check(CLI::IsMember({"chain", "grid2d", "grid3d"}));
  g->add_option("--dims", gen.dims)->expected(1, 3);
  g->add_option("--sparsity", gen.sparsity)->check(CLI::Range(0.0, 1.0));
  g->add_option("--outliers", gen.outliers)->check(CLI::Range(0.0, 1.0));
  g->add_option("--noise", gen.noise)->check(CLI::NonNegativeNumber);
  g->add_option("--seed", gen.seed);
  g->add_option("--mode", gen.mode)->check(CLI::IsMember({"sparse", "robust"}));
  g->add_option("--cost", gen.cost)->check(CLI::NonNegativeNumber);
  g->add_option("--edge-weight", gen.edge_weight)->check(CLI::NonNegativeNumber);
  g->add_option("--node-weight", gen.node_weight)->check(CLI::PositiveNumber);
  g->add_option("-o,--output", gen.output)->required();

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Minimize f(x) + c'z exactly");
  s->add_option("-i,--input", solve.input)->required()->check(CLI::ExistingFile);
  s->add_option("-o,--output", solve.output);
  s->add_option("--engine", solve.engine)->check(CLI::IsMember({"exhaustive", "mnp"}));
  s->add_option("--tol", solve.tol)->check(CLI::PositiveNumber);
  s->add_option("--ridge", solve.ridge)->check(CLI::PositiveNumber);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Value function v(z) for a fixed indicator vector");
  e->add_option("-i,--input", ev.input)->required()->check(CLI::ExistingFile);
  e->add_option("-o,--output", ev.output);
  e->add_option("--z", ev.z)->required();
  e->add_option("--ridge", ev.ridge)->check(CLI::PositiveNumber);

  TraceArgs tr;
  auto* t = app.add_subcommand("trace", "Value chain over the split coordinates by path tracing");
  t->add_option("-i,--input", tr.input)->required()->check(CLI::ExistingFile);
  t->add_option("-o,--output", tr.output);
  t->add_option("--order", tr.order);
  t->add_option("--ridge", tr.ridge)->check(CLI::PositiveNumber);

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Randomized property suite against the brute-force oracle");
  v->add_option("--trials", ver.trials)->check(CLI::PositiveNumber);
  v->add_option("--n", ver.n)->check(CLI::Range(Index(1), kBruteForceLimit));
  v->add_option("--regime", ver.regime)->check(CLI::IsMember({"nonnegative", "mixed", "negative"}));
  v->add_option("--seed", ver.seed);
  v->add_option("--density", ver.density)->check(CLI::Range(0.0, 1.0));
  v->add_option("-o,--output", ver.output);
  v->add_option("--witness-dir", ver.witness_dir);

  BenchArgs be;
  auto* b = app.add_subcommand("bench", "Time one chain against n+1 independent box QPs");
  b->add_option("--sizes", be.sizes)->check(CLI::Range(Index(2), Index(1) << 20));
  b->add_option("--reps", be.reps)->check(CLI::Range(3, 1000));
  b->add_option("--seed", be.seed);
  b->add_option("-o,--output", be.output);

  CheckArgs ch;
  auto* c = app.add_subcommand("check", "Submodularity check of an instance, or replay of a witness");
  auto* ci = c->add_option("-i,--input", ch.input)->check(CLI::ExistingFile);
  auto* cw = c->add_option("--witness", ch.witness)->check(CLI::ExistingFile);
  ci->excludes(cw);
  c->add_option("-o,--output", ch.output);
  c->add_option("--ridge", ch.ridge)->check(CLI::PositiveNumber);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << '\n';
    return kInputError;
  }

  try {
    if (*g) return cmd_generate(gen, out);
    if (*s) return cmd_solve(solve, out);
    if (*e) return cmd_eval(ev, out);
    if (*t) return cmd_trace(tr, out);
    if (*v) return cmd_verify(ver, out);
    if (*b) return cmd_bench(be, out);
    if (*c) {
      if (ch.input.empty() && ch.witness.empty()) throw InputError("check needs --input or --witness");
      return cmd_check(ch, out);
    }
  } catch (const InputError& ex) {
    err << "input error: " << ex.what() << '\n';
    return kInputError;
  } catch (const Json::exception& ex) {
    err << "input error: " << ex.what() << '\n';
    return kInputError;
  } catch (const NumericalError& ex) {
    err << "numerical failure: " << ex.what() << '\n';
    return kNumericalError;
  }
  return kInputError;
}

}  // namespace subind::cli

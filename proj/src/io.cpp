#include "subind/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace subind::io {

namespace {

[[noreturn]] void fail(std::string_view what, std::string_view problem) {
  std::string msg(what);
  msg += ": ";
  msg += problem;
  throw InputError(msg);
}

const Json& require(const Json& object, const char* key) {
  const auto it = object.find(key);
  if (it == object.end()) fail(key, "missing required field");
  return *it;
}

Index index_from_json(const Json& value, std::string_view what) {
  if (!value.is_number_integer()) fail(what, "expected an integer");
  return value.get<Index>();
}

}  // namespace

Json real_to_json(double value) {
  if (value == infinity<double>()) return "inf";
  if (value == -infinity<double>()) return "-inf";
  return value;
}

double real_from_json(const Json& value, std::string_view what) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    if (s == "inf" || s == "+inf") return infinity<double>();
    if (s == "-inf") return -infinity<double>();
  }
  fail(what, "expected a number, \"inf\" or \"-inf\"");
}

Json vector_to_json(const Vector<double>& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(real_to_json(v[i]));
  return out;
}

Vector<double> vector_from_json(const Json& value, std::string_view what) {
  if (!value.is_array()) fail(what, "expected an array");
  Vector<double> out(static_cast<Index>(value.size()));
  for (std::size_t k = 0; k < value.size(); ++k) {
    std::ostringstream where;
    where << what << "[" << k << "]";
    out[static_cast<Index>(k)] = real_from_json(value[k], where.str());
  }
  return out;
}

Json binary_to_json(const BinaryVector& z) {
  Json out = Json::array();
  for (auto b : z) out.push_back(static_cast<int>(b));
  return out;
}

BinaryVector binary_from_json(const Json& value, std::string_view what) {
  if (!value.is_array()) fail(what, "expected an array of 0/1");
  BinaryVector out;
  out.reserve(value.size());
  for (const Json& b : value) {
    if (b.is_boolean()) {
      out.push_back(b.get<bool>());
    } else if (b.is_number_integer() && (b.get<int>() == 0 || b.get<int>() == 1)) {
      out.push_back(static_cast<std::uint8_t>(b.get<int>()));
    } else {
      fail(what, "entries must be 0 or 1");
    }
  }
  return out;
}

void reject_unknown_keys(const Json& object, std::initializer_list<std::string_view> allowed,
                         std::string_view context) {
  if (!object.is_object()) fail(context, "expected a JSON object");
  for (const auto& item : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      fail(context, "unknown field '" + item.key() + "'");
  }
}

Json instance_to_json(const ProblemInstance& inst) {
  Json edges = Json::array();
  for (const Edge& e : inst.graph.edges) edges.push_back(Json::array({e.i, e.j, e.weight}));
  return Json{{"mode", to_string(inst.mode)},
              {"n", inst.graph.num_vertices},
              {"edges", edges},
              {"a", vector_to_json(inst.observations)},
              {"node_weights", vector_to_json(inst.node_weights)},
              {"c", vector_to_json(inst.costs)},
              {"l", vector_to_json(inst.lower)},
              {"u", vector_to_json(inst.upper)}};
}

ProblemInstance instance_from_json(const Json& json) {
  reject_unknown_keys(json, {"mode", "n", "edges", "a", "node_weights", "c", "l", "u"}, "instance");
  ProblemInstance inst;
  const Json& mode = require(json, "mode");
  if (!mode.is_string()) fail("mode", "expected \"sparse\" or \"robust\"");
  inst.mode = parse_mode(mode.get<std::string>());
  inst.graph.num_vertices = index_from_json(require(json, "n"), "n");
  const Json& edges = require(json, "edges");
  if (!edges.is_array()) fail("edges", "expected an array of [i, j, w]");
  for (std::size_t k = 0; k < edges.size(); ++k) {
    std::ostringstream where;
    where << "edges[" << k << "]";
    const Json& e = edges[k];
    if (!e.is_array() || e.size() != 3) fail(where.str(), "expected [i, j, w]");
    inst.graph.edges.push_back(
        {index_from_json(e[0], where.str()), index_from_json(e[1], where.str()), real_from_json(e[2], where.str())});
  }
  inst.observations = vector_from_json(require(json, "a"), "a");
  inst.node_weights = vector_from_json(require(json, "node_weights"), "node_weights");
  inst.costs = vector_from_json(require(json, "c"), "c");
  inst.lower = vector_from_json(require(json, "l"), "l");
  inst.upper = vector_from_json(require(json, "u"), "u");
  inst.validate();
  return inst;
}

Json truth_to_json(const GroundTruth& truth) {
  return Json{{"x", vector_to_json(truth.x)}, {"outliers", truth.outliers}, {"seed", truth.seed}};
}

Json problem_to_json(const IndicatorProblem& problem) {
  Json rows = Json::array();
  for (Index i = 0; i < problem.quad.Q.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < problem.quad.Q.cols(); ++j) row.push_back(problem.quad.Q(i, j));
    rows.push_back(row);
  }
  Json roles = Json::array();
  for (const VariableInfo& r : problem.roles)
    roles.push_back(Json::array({r.role == VariableRole::signal ? "signal" : "slack_w", r.vertex}));
  return Json{{"mode", to_string(problem.mode)},
              {"Q", rows},
              {"a", vector_to_json(problem.quad.a)},
              {"k0", problem.quad.k0},
              {"c", vector_to_json(problem.costs)},
              {"l", vector_to_json(problem.lower)},
              {"u", vector_to_json(problem.upper)},
              {"roles", roles}};
}

IndicatorProblem problem_from_json(const Json& json) {
  reject_unknown_keys(json, {"mode", "Q", "a", "k0", "c", "l", "u", "roles"}, "problem");
  IndicatorProblem p;
  const Json& mode = require(json, "mode");
  if (!mode.is_string()) fail("mode", "expected \"sparse\" or \"robust\"");
  p.mode = parse_mode(mode.get<std::string>());
  p.quad.a = vector_from_json(require(json, "a"), "a");
  const Index n = p.quad.a.size();
  const Json& rows = require(json, "Q");
  if (!rows.is_array() || static_cast<Index>(rows.size()) != n) fail("Q", "expected one row per variable");
  p.quad.Q.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    const Vector<double> row = vector_from_json(rows[static_cast<std::size_t>(i)], "Q");
    if (row.size() != n) fail("Q", "rows must be square");
    p.quad.Q.row(i) = row.transpose();
  }
  p.quad.k0 = real_from_json(require(json, "k0"), "k0");
  p.costs = vector_from_json(require(json, "c"), "c");
  p.lower = vector_from_json(require(json, "l"), "l");
  p.upper = vector_from_json(require(json, "u"), "u");
  if (p.costs.size() != n || p.lower.size() != n || p.upper.size() != n)
    fail("problem", "c, l and u need one entry per variable");
  if (const auto it = json.find("roles"); it != json.end()) {
    if (!it->is_array() || static_cast<Index>(it->size()) != n) fail("roles", "expected one entry per variable");
    for (const Json& r : *it) {
      if (!r.is_array() || r.size() != 2 || !r[0].is_string()) fail("roles", "expected [role, vertex]");
      const auto& name = r[0].get_ref<const std::string&>();
      if (name != "signal" && name != "slack_w") fail("roles", "role must be signal or slack_w");
      p.roles.push_back({name == "signal" ? VariableRole::signal : VariableRole::slack_w, index_from_json(r[1], "roles")});
    }
  } else {
    for (Index i = 0; i < n; ++i) p.roles.push_back({VariableRole::signal, i});
  }
  for (Index i = 0; i < n; ++i)
    if (!(p.lower[i] <= p.upper[i])) fail("problem", "lower bound exceeds upper bound");
  return p;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& json) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << json.dump(2) << '\n';
}

ProblemInstance read_instance(const std::filesystem::path& path) { return instance_from_json(read_json(path)); }

void write_instance(const std::filesystem::path& path, const ProblemInstance& inst) {
  write_json(path, instance_to_json(inst));
}

std::filesystem::path truth_path(const std::filesystem::path& instance_path) {
  std::filesystem::path out = instance_path;
  out.replace_filename(instance_path.stem().string() + "_truth.json");
  return out;
}

}  // namespace subind::io

#ifndef SUBIND_IO_HPP
#define SUBIND_IO_HPP

#include "subind/model.hpp"

#include <json.hpp>

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

namespace subind::io {

using Json = nlohmann::json;

/// Extended reals: finite numbers stay numbers, infinities become "inf"/"-inf".
Json real_to_json(double value);
double real_from_json(const Json& value, std::string_view what);

Json vector_to_json(const Vector<double>& v);
Vector<double> vector_from_json(const Json& value, std::string_view what);
Json binary_to_json(const BinaryVector& z);
BinaryVector binary_from_json(const Json& value, std::string_view what);

/// Throws InputError naming the first key of `object` not in `allowed`.
void reject_unknown_keys(const Json& object, std::initializer_list<std::string_view> allowed,
                         std::string_view context);

Json instance_to_json(const ProblemInstance& inst);
/// Validates the instance; unknown keys and malformed entries are InputErrors.
ProblemInstance instance_from_json(const Json& json);

Json truth_to_json(const GroundTruth& truth);

/// Compiled problem: {"mode", "Q", "a", "k0", "c", "l", "u", "roles"}.
Json problem_to_json(const IndicatorProblem& problem);
IndicatorProblem problem_from_json(const Json& json);

/// Parse errors carry the location reported by the parser.
Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& json);

ProblemInstance read_instance(const std::filesystem::path& path);
void write_instance(const std::filesystem::path& path, const ProblemInstance& inst);

/// "dir/name.json" -> "dir/name_truth.json".
std::filesystem::path truth_path(const std::filesystem::path& instance_path);

}  // namespace subind::io

#endif  // SUBIND_IO_HPP

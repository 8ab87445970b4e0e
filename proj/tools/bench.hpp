#ifndef SUBIND_TOOLS_BENCH_HPP
#define SUBIND_TOOLS_BENCH_HPP

#include "subind/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace subind::cli {

struct BenchRow {
  Index n = 0;
  double t_chain_ms = 0.0;  // median over reps
  double t_naive_ms = 0.0;  // median over reps
  Index breakpoints = 0;
};

/// Times one path-traced chain of n+1 values against n+1 independent box QPs
/// on the same nonnegative instance, for every size.
std::vector<BenchRow> run_bench(const std::vector<Index>& sizes, int reps, std::uint64_t seed);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace subind::cli

#endif  // SUBIND_TOOLS_BENCH_HPP

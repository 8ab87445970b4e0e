#include "bench.hpp"

#include "subind/boxqp.hpp"
#include "subind/oracle.hpp"
#include "subind/pathtrace.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

namespace subind::cli {

namespace {

// Sparse-ish random Stieltjes matrices keep the instance build cheap at n=400;
// the solvers themselves work on dense storage either way.
constexpr double kBenchDensity = 0.05;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

template <typename F>
double time_ms(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::vector<BenchRow> run_bench(const std::vector<Index>& sizes, int reps, std::uint64_t seed) {
  if (reps < 3) throw InputError("bench: at least 3 repetitions are needed for a median");
  std::vector<BenchRow> rows;
  for (Index n : sizes) {
    if (n < 2) throw InputError("bench: sizes must be at least 2");
    InstanceSampler sampler;
    sampler.n = n;
    sampler.density = kBenchDensity;
    sampler.regime = BoundRegime::nonnegative;
    sampler.seed = seed;
    IndicatorProblem p = sampler.sample(static_cast<std::uint64_t>(n));
    p.lower.setZero();
    const std::vector<Index> order = natural_order(n);

    BenchRow row;
    row.n = n;
    std::vector<double> chain_ms, naive_ms;
    for (int r = 0; r < reps; ++r) {
      ValueChain<double> chain;
      chain_ms.push_back(time_ms([&] { chain = chain_nonnegative(p.quad, p.lower, p.upper, order); }));
      row.breakpoints = static_cast<Index>(chain.breakpoints.size());

      BoxQpOptions opts;
      opts.validate = false;
      double sink = 0.0;
      naive_ms.push_back(time_ms([&] {
        require_stieltjes(p.quad);
        Vector<double> hi = Vector<double>::Zero(n);
        for (Index k = 0; k <= n; ++k) {
          if (k > 0) hi[order[k - 1]] = p.upper[order[k - 1]];
          sink += boxqp::solve(p.quad, p.lower, hi, opts).value;
        }
      }));
      if (std::abs(sink / (n + 1)) > 1e300) row.breakpoints = -1;  // keeps the loop observable
    }
    row.t_chain_ms = median(chain_ms);
    row.t_naive_ms = median(naive_ms);
    rows.push_back(row);
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream s;
  s << "n,t_chain_ms,t_naive_ms,breakpoints\n";
  for (const auto& r : rows) s << r.n << ',' << r.t_chain_ms << ',' << r.t_naive_ms << ',' << r.breakpoints << '\n';
  return s.str();
}

}  // namespace subind::cli

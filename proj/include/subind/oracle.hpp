#ifndef SUBIND_ORACLE_HPP
#define SUBIND_ORACLE_HPP

#include "subind/io.hpp"
#include "subind/model.hpp"
#include "subind/sfm.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace subind {

enum class BoundRegime { nonnegative, mixed, negative };

std::string to_string(BoundRegime regime);
BoundRegime parse_regime(const std::string& text);

/// Random Stieltjes instances Q = D + L_w with diag(D) >= 1e-3. The same
/// (seed, trial) always gives the same instance.
struct InstanceSampler {
  Index n = 6;
  double density = 0.5;
  BoundRegime regime = BoundRegime::mixed;
  std::uint64_t seed = 0;
  /// Indicator costs are uniform on [0, cost_scale].
  double cost_scale = 1.0;
  /// Probability that a trial carries a positive off-diagonal entry.
  double adversarial_rate = 0.0;

  IndicatorProblem sample(std::uint64_t trial) const;

  /// MRF instance over a random graph; robust bounds always contain 0.
  ProblemInstance sample_instance(std::uint64_t trial, Mode mode) const;
};

inline constexpr Index kBruteForceLimit = 14;

/// Exact optimum by enumerating all 2^n original indicator vectors; ties go
/// to the lexicographically smallest z.
Solution brute_force(const IndicatorProblem& problem);

/// Named invariant checks. Each is deterministic given (problem, seed).
enum class Check {
  stieltjes,
  boxqp_kkt,
  submodularity,
  chain_vs_boxqp,
  breakpoint_budget,
  monotone_path,
  lovasz,
  exactness,
  recovery,
};

std::string to_string(Check check);
Check parse_check(const std::string& text);
const std::vector<Check>& all_checks();

struct CheckOutcome {
  bool passed = true;
  bool skipped = false;
  std::string message;
  io::Json details;
};

CheckOutcome run_check(Check check, const IndicatorProblem& problem, std::uint64_t seed);

struct CheckTally {
  Check check = Check::stieltjes;
  Index passed = 0;
  Index failed = 0;
  Index skipped = 0;
  std::optional<io::Json> witness;  // first failure
};

struct PropertyReport {
  std::uint64_t seed = 0;
  Index trials = 0;
  std::vector<CheckTally> tallies;

  bool all_passed() const;
  io::Json to_json() const;
};

/// Runs every check on `trials` sampled problems. A failed Stieltjes check
/// skips the rest for that trial. Witnesses hold the full problem and the
/// check seed, see replay_witness.
PropertyReport run_property_suite(const InstanceSampler& sampler, Index trials);

/// Re-runs the check named in a witness on the problem it carries.
CheckOutcome replay_witness(const io::Json& witness);

io::Json make_witness(Check check, const IndicatorProblem& problem, std::uint64_t seed, const CheckOutcome& outcome);

}  // namespace subind

#endif  // SUBIND_ORACLE_HPP

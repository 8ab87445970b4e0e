#include <doctest.h>

#include "subind/pathtrace.hpp"

#include <random>

using namespace subind;

namespace {

QuadraticForm<double> two_chain() {
  QuadraticForm<double> q;
  q.Q.resize(2, 2);
  q.Q << 2, -1, -1, 2;
  q.a.resize(2);
  q.a << 1, 0;
  return q;
}

QuadraticForm<double> scalar(double Q, double a) {
  QuadraticForm<double> q;
  q.Q = Matrix<double>::Constant(1, 1, Q);
  q.a = Vector<double>::Constant(1, a);
  return q;
}

Vector<double> vec(std::initializer_list<double> v) {
  Vector<double> out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

struct RandomCase {
  QuadraticForm<double> quad;
  Vector<double> lower, upper;
};

RandomCase random_case(Index n, bool nonnegative, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomCase rc;
  rc.quad.Q = Matrix<double>::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (u(rng) < 0.4) rc.quad.Q(i, j) = rc.quad.Q(j, i) = -u(rng);
  for (Index i = 0; i < n; ++i) rc.quad.Q(i, i) = -rc.quad.Q.row(i).sum() + 0.01 + 0.5 * u(rng);
  rc.quad.a = Vector<double>::NullaryExpr(n, [&] { return 4.0 * u(rng) - 1.5; });
  rc.lower.resize(n);
  rc.upper.resize(n);
  for (Index i = 0; i < n; ++i) {
    rc.lower[i] = nonnegative ? (u(rng) < 0.5 ? 0.0 : u(rng)) : 3.0 * u(rng) - 2.0;
    rc.upper[i] = std::max(rc.lower[i], 0.0) + 0.05 + 2.0 * u(rng);
  }
  return rc;
}

}  // namespace

TEST_CASE("nonnegative chain on the two-chain") {
  const auto q = two_chain();
  const auto order = natural_order(2);
  const auto chain = chain_nonnegative(q, vec({0, 0}), vec({10, 10}), order);
  REQUIRE(chain.values.size() == 3);
  CHECK(chain.values[0] == 0.0);
  CHECK(chain.values[1] == doctest::Approx(-0.25));
  CHECK(chain.values[2] == doctest::Approx(-1.0 / 3.0));
  CHECK(chain.minimizers[2][0] == doctest::Approx(2.0 / 3.0));
  CHECK(chain.minimizers[2][1] == doctest::Approx(1.0 / 3.0));

  const std::vector<Index> reversed{1, 0};
  const auto back = chain_nonnegative(q, vec({0, 0}), vec({10, 10}), reversed);
  CHECK(back.values[1] == doctest::Approx(0.0));
  CHECK(back.values[2] == doctest::Approx(-1.0 / 3.0));
}

TEST_CASE("breakpoint when the first coordinate reaches its upper bound") {
  const auto order = natural_order(2);
  const auto chain = chain_nonnegative(two_chain(), vec({0, 0}), vec({0.6, 10}), order);
  CHECK(chain.minimizers[2][0] == doctest::Approx(0.6));
  CHECK(chain.minimizers[2][1] == doctest::Approx(0.3));
  CHECK(chain.values[2] == doctest::Approx(-0.33));
  bool found = false;
  for (const auto& bp : chain.breakpoints) {
    if (bp.stage == 2 && bp.index == 0 && bp.event == BreakpointEvent::hit_upper) {
      CHECK(bp.parameter == doctest::Approx(0.2));
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("scalar chains") {
  const auto one = natural_order(1);
  const auto pos = chain_nonnegative(scalar(2, 3), vec({0}), vec({10}), one);
  CHECK(pos.values[1] == doctest::Approx(-9.0 / 4.0));
  CHECK(pos.minimizers[1][0] == doctest::Approx(1.5));

  // split coordinates of [-5, 5]: z+ is coordinate 0, z- is coordinate 1
  const auto q = scalar(2, -3);
  const std::vector<Index> minus_first{1, 0};
  const auto general = chain_general(q, vec({-5}), vec({5}), minus_first);
  CHECK(general.values[0] == doctest::Approx(-2.25));
  CHECK(general.minimizers[0][0] == doctest::Approx(-1.5));
  CHECK(general.values[1] == doctest::Approx(0.0));
  CHECK(general.values[2] == doctest::Approx(0.0));

  const std::vector<Index> plus_first{0, 1};
  const auto other = chain_general(q, vec({-5}), vec({5}), plus_first);
  CHECK(other.values[1] == doctest::Approx(-2.25));
  CHECK(other.values[2] == doctest::Approx(0.0));

  const auto boundary = chain_general(scalar(2, 3), vec({-5}), vec({5}), minus_first);
  CHECK(boundary.values[0] == 0.0);
  CHECK(boundary.minimizers[0][0] == 0.0);
}

TEST_CASE("lovasz extension") {
  const auto chain = chain_nonnegative(two_chain(), vec({0, 0}), vec({10, 10}), natural_order(2));
  CHECK(lovasz(chain, vec({0.5, 0.25})) == doctest::Approx(-7.0 / 48.0));
  CHECK(lovasz(chain, vec({0.9, 0.1})) == doctest::Approx(-0.9 / 4 - 0.1 / 12));
  CHECK(lovasz(chain, vec({1, 1})) == doctest::Approx(chain.values[2]));
  CHECK(lovasz(chain, vec({0, 0})) == chain.values[0]);
  CHECK_THROWS_AS(lovasz(chain, vec({0.25, 0.5})), InputError);
  CHECK_THROWS_AS(lovasz(chain, vec({1.5, 0.5})), InputError);
}

TEST_CASE("trace to the current parameter leaves the state unchanged") {
  const auto q = two_chain();
  Vector<double> lo = vec({0, 0}), hi = vec({10, 0});
  const auto start = boxqp::solve(q, lo, hi);
  PathState<double> state(q, lo, hi, start.x);
  state.stage = 2;
  state.release(1);
  const auto same = trace_path(q, state, TraceTarget<double>::to_value(0.0));
  CHECK((same.x() - state.x()).norm() == 0.0);
}

TEST_CASE("chain rejects bad input") {
  const auto q = two_chain();
  const std::vector<Index> bad{0, 0};
  CHECK_THROWS_AS(chain_nonnegative(q, vec({0, 0}), vec({1, 1}), bad), InputError);
  CHECK_THROWS_AS(chain_nonnegative(q, vec({0, 0}), vec({1, infinity<double>()}), natural_order(2)), InputError);
  CHECK_THROWS_AS(chain_nonnegative(q, vec({-1, 0}), vec({1, 1}), natural_order(2)), InputError);
}

TEST_CASE("random chains agree with independent box QPs") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 120; ++trial) {
    const bool nonneg = trial % 2 == 0;
    const Index n = 1 + trial % 17;
    const auto rc = random_case(n, nonneg, rng);
    const SplitResult s = split(rc.lower, rc.upper, Vector<double>::Zero(n));
    const Index m = s.map.binary_dim();
    std::vector<Index> order = natural_order(m);
    std::shuffle(order.begin(), order.end(), rng);
    ChainOptions opts;
    opts.audit = true;
    opts.record_iterates = true;
    const auto chain = chain_split(rc.quad, rc.lower, rc.upper, s.map, order, opts);
    REQUIRE(chain.values.size() == static_cast<std::size_t>(m + 1));

    BinaryVector z(m, 0);
    for (Index k = 0; k <= m; ++k) {
      if (k > 0) z[order[k - 1]] = 1;
      const double expect = boxqp::value_function(rc.quad, rc.lower, rc.upper, s.map, z);
      CHECK(std::abs(chain.values[k] - expect) <= 1e-8);
    }
    CHECK(static_cast<Index>(chain.breakpoints.size()) <= (nonneg ? 2 * n : 4 * n));
    for (std::size_t t = 1; t < chain.samples.size(); ++t)
      CHECK((chain.samples[t].x - chain.samples[t - 1].x).minCoeff() >= -1e-10);
  }
}

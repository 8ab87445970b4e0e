#include <doctest.h>

#include "subind/boxqp.hpp"

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

Vector<double> vec(std::initializer_list<double> v) {
  Vector<double> out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

QuadraticForm<double> random_stieltjes(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  QuadraticForm<double> q;
  q.Q = Matrix<double>::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (u(rng) < 0.5) q.Q(i, j) = q.Q(j, i) = -u(rng);
  for (Index i = 0; i < n; ++i) q.Q(i, i) = -q.Q.row(i).sum() + 0.1 + u(rng);
  q.a.resize(n);
  for (Index i = 0; i < n; ++i) q.a[i] = 6.0 * u(rng) - 3.0;
  return q;
}

}  // namespace

TEST_CASE("interior minimizer of the two-chain") {
  const auto sol = boxqp::solve(two_chain(), vec({0, 0}), vec({10, 10}));
  CHECK(sol.x[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(sol.x[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(sol.value == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  CHECK(sol.partition.R.size() == 2);
}

TEST_CASE("pinned coordinate") {
  const auto sol = boxqp::solve(two_chain(), vec({0, 0}), vec({10, 0}));
  CHECK(sol.x[0] == doctest::Approx(0.5));
  CHECK(sol.x[1] == 0.0);
  CHECK(sol.value == doctest::Approx(-0.25));
  // x2 sits at lo == hi: fixed variables are reported in S
  CHECK(sol.partition.S == std::vector<Index>{1});
}

TEST_CASE("zero linear term gives the origin") {
  auto q = two_chain();
  q.a.setZero();
  const auto sol = boxqp::solve(q, vec({-1, -2}), vec({3, 4}));
  CHECK(sol.x.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sol.value == 0.0);
}

TEST_CASE("infinite bounds") {
  const double inf = infinity<double>();
  const auto sol = boxqp::solve(two_chain(), vec({-inf, -inf}), vec({inf, inf}));
  CHECK(sol.x[0] == doctest::Approx(2.0 / 3.0));
  const auto upper_only = boxqp::solve(two_chain(), vec({-inf, -inf}), vec({0.1, inf}));
  CHECK(upper_only.x[0] == doctest::Approx(0.1));
  CHECK(upper_only.x[1] == doctest::Approx(0.05));
}

TEST_CASE("value function on the four binary points") {
  const SplitResult s = split(vec({0, 0}), vec({10, 10}), vec({0, 0}));
  const auto v = [&](BinaryVector z) { return boxqp::value_function(two_chain(), vec({0, 0}), vec({10, 10}), s.map, z); };
  CHECK(v({0, 0}) == 0.0);
  CHECK(v({1, 0}) == doctest::Approx(-0.25));
  CHECK(v({0, 1}) == doctest::Approx(0.0));
  CHECK(v({1, 1}) == doctest::Approx(-1.0 / 3.0));
  CHECK(v({1, 0}) + v({0, 1}) >= v({0, 0}) + v({1, 1}));
}

TEST_CASE("rejects bad input") {
  auto q = two_chain();
  CHECK_THROWS_AS(boxqp::solve(q, vec({1, 0}), vec({0, 1})), InputError);
  q.Q(0, 1) = q.Q(1, 0) = 0.5;
  CHECK_THROWS_AS(boxqp::solve(q, vec({0, 0}), vec({1, 1})), InputError);
  CHECK_THROWS_AS(boxqp::solve(two_chain(), vec({0}), vec({1})), InputError);
}

TEST_CASE("random instances pass the KKT audit and are order independent") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 1 + trial % 12;
    const auto q = random_stieltjes(n, rng);
    Vector<double> lo(n), hi(n);
    for (Index i = 0; i < n; ++i) {
      lo[i] = -2.0 * u(rng);
      hi[i] = lo[i] + 3.0 * u(rng);
    }
    const auto sol = boxqp::solve(q, lo, hi);
    CHECK(sol.kkt_residual <= boxqp::kkt_tolerance(q));
    CHECK(((sol.x - lo).array() >= 0).all());
    CHECK(((hi - sol.x).array() >= 0).all());

    // reversed variable order
    Eigen::PermutationMatrix<Eigen::Dynamic> P(n);
    for (Index i = 0; i < n; ++i) P.indices()[i] = static_cast<int>(n - 1 - i);
    QuadraticForm<double> qp;
    qp.Q = P * q.Q * P.transpose();
    qp.a = P * q.a;
    const auto solp = boxqp::solve(qp, Vector<double>(P * lo), Vector<double>(P * hi));
    CHECK((P.transpose() * solp.x - sol.x).cwiseAbs().maxCoeff() <= 1e-8);

    // raising one linear coefficient moves the minimizer up
    auto bumped = q;
    bumped.a[trial % n] += 0.5;
    const auto solb = boxqp::solve(bumped, lo, hi);
    CHECK(((solb.x - sol.x).array() >= -1e-10).all());
  }
}

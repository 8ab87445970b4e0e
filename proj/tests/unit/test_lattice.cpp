#include <doctest.h>

#include "subind/boxqp.hpp"
#include "subind/lattice.hpp"

#include <random>

using namespace subind;

namespace {

Vector<double> vec(std::initializer_list<double> v) {
  Vector<double> out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("split partitions by sign") {
  const SplitResult s = split(vec({-1, 0, -2}), vec({2, 3, -1}), vec({1, 1, 1}));
  CHECK(s.map.n_pm == std::vector<Index>{0});
  CHECK(s.map.n_plus == std::vector<Index>{1});
  CHECK(s.map.n_minus == std::vector<Index>{2});
  CHECK(s.map.binary_dim() == 4);
}

TEST_CASE("nonnegative bounds give the identity map") {
  const SplitResult s = split(vec({0, 0, 0}), vec({1, 1, 1}), vec({1, 2, 3}));
  CHECK(s.map.binary_dim() == 3);
  const BinaryVector z{1, 0, 1};
  CHECK(s.map.to_original(z) == z);
  CHECK(s.cost.evaluate(z) == 4.0);
}

TEST_CASE("boundary classification") {
  const SplitResult s = split(vec({0, 0, -1}), vec({0, 2, 0}), vec({0, 0, 0}));
  CHECK(s.map.classes[0] == SignClass::plus);
  CHECK(s.map.classes[1] == SignClass::plus);
  CHECK(s.map.classes[2] == SignClass::minus);
}

TEST_CASE("binary cost of a straddling variable") {
  const SplitResult s = split(vec({-1}), vec({1}), vec({3}));
  // layout: z+ then z-
  CHECK(s.cost.evaluate({1, 1}) == 3.0);
  CHECK(s.cost.evaluate({0, 0}) == 3.0);
  CHECK(s.cost.evaluate({0, 1}) == 0.0);
}

TEST_CASE("forward map round trip and cost agreement") {
  const Vector<double> lo = vec({-1, 0.5, -3, -2});
  const Vector<double> hi = vec({2, 3, -1, 5});
  const Vector<double> c = vec({1.5, 2, 0.25, 4});
  const SplitResult s = split(lo, hi, c);
  const Index m = s.map.binary_dim();
  for (Index mask = 0; mask < (Index(1) << m); ++mask) {
    BinaryVector zbin(m);
    for (Index k = 0; k < m; ++k) zbin[k] = (mask >> k) & 1;
    bool feasible = true;
    for (Index i : s.map.n_pm) feasible = feasible && zbin[s.map.minus_coordinate[i]] >= zbin[s.map.plus_coordinate[i]];
    if (!feasible) continue;
    const BinaryVector z = s.map.to_original(zbin);
    double cz = 0.0;
    for (Index i = 0; i < 4; ++i) cz += c[i] * z[i];
    CHECK(s.cost.evaluate(zbin) == doctest::Approx(cz));
    // the image box contains the sign-consistent point used by from_original
    const auto [blo, bhi] = bounds_for_binary(s.map, zbin, lo, hi);
    const Vector<double> mid = 0.5 * (blo + bhi);
    const Vector<double> x = mid + 1e-3 * (bhi - mid);
    const BinaryVector back = s.map.from_original(z, x);
    CHECK(s.map.to_original(back) == z);
  }
}

TEST_CASE("bounds for binary vectors") {
  const SplitResult s = split(vec({-1, 1}), vec({2, 3}), vec({0, 0}));
  // coordinates: z+_0, z+_1, z-_0
  const auto [lo, hi] = bounds_for_binary(s.map, BinaryVector{0, 1, 1}, vec({-1, 1}), vec({2, 3}));
  CHECK(lo[0] == 0.0);
  CHECK(hi[0] == 0.0);
  CHECK(lo[1] == 1.0);
  CHECK(hi[1] == 3.0);
  const auto [lo2, hi2] = bounds_for_binary(s.map, BinaryVector{1, 0, 0}, vec({-1, 1}), vec({2, 3}));
  CHECK(lo2[0] == -1.0);
  CHECK(hi2[0] == 2.0);
  CHECK(lo2[1] == 0.0);
  CHECK(hi2[1] == 0.0);
  CHECK_THROWS_AS(bounds_for_binary(s.map, BinaryVector{1, 0}, vec({-1, 1}), vec({2, 3})), InputError);
}

TEST_CASE("infinite bounds scale to zero when switched off") {
  const double inf = infinity<double>();
  const SplitResult s = split(vec({-inf}), vec({inf}), vec({1}));
  const auto [lo, hi] = bounds_for_binary(s.map, BinaryVector{0, 1}, vec({-inf}), vec({inf}));
  CHECK(lo[0] == 0.0);
  CHECK(hi[0] == 0.0);
}

TEST_CASE("zeroth-order checker") {
  const std::vector<Vector<double>> probes{vec({0, 0})};
  const std::vector<double> steps{1.0};
  const auto bad = check_submodular_zeroth([](const Vector<double>& x) { return x[0] * x[1]; }, probes, steps);
  REQUIRE(bad.has_value());
  CHECK(bad->lhs == 0.0);
  CHECK(bad->rhs == 1.0);
  CHECK_FALSE(check_submodular_zeroth([](const Vector<double>& x) { return -x[0] * x[1]; }, probes, steps));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  QuadraticForm<double> q;
  q.Q.resize(3, 3);
  q.Q << 3, -1, -0.5, -1, 2, 0, -0.5, 0, 1;
  q.a = vec({1, -2, 0.5});
  std::vector<Vector<double>> many;
  for (int k = 0; k < 1000; ++k) many.push_back(vec({u(rng), u(rng), u(rng)}));
  const std::vector<double> various{0.1, 0.5, 2.0};
  CHECK_FALSE(check_submodular_zeroth([&](const Vector<double>& x) { return q.value(x); }, many, various));
}

TEST_CASE("first- and second-order checkers") {
  const std::vector<Vector<double>> probes{vec({0.3, -0.2})};
  const std::vector<double> steps{0.5, 1.0};
  const auto bad_grad = [](const Vector<double>& x) { return vec({x[1], x[0]}); };
  const auto good_grad = [](const Vector<double>& x) { return vec({-x[1], -x[0]}); };
  CHECK(check_submodular_first(bad_grad, probes, steps).has_value());
  CHECK_FALSE(check_submodular_first(good_grad, probes, steps).has_value());

  Matrix<double> H(2, 2);
  H << 2, 0.1, 0.1, 2;
  const auto w = check_submodular_second(H);
  REQUIRE(w.has_value());
  CHECK(w->value == 0.1);
  H(0, 1) = H(1, 0) = -0.1;
  CHECK_FALSE(check_submodular_second(H).has_value());
}

TEST_CASE("set-function checker on the reformulated value function") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 1 + trial % 4;
    QuadraticForm<double> q;
    q.Q = Matrix<double>::Zero(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) q.Q(i, j) = q.Q(j, i) = -u(rng);
    for (Index i = 0; i < n; ++i) q.Q(i, i) = -q.Q.row(i).sum() + 0.05 + u(rng);
    q.a = Vector<double>::NullaryExpr(n, [&] { return 4.0 * u(rng) - 2.0; });
    Vector<double> lo(n), hi(n);
    for (Index i = 0; i < n; ++i) {
      lo[i] = 2.0 * u(rng) - 1.5;
      hi[i] = lo[i] + 2.0 * u(rng) + 0.1;
    }
    const SplitResult s = split(lo, hi, Vector<double>::Zero(n));
    const auto v = [&](const BinaryVector& z) { return boxqp::value_function(q, lo, hi, s.map, z); };
    CHECK_FALSE(check_set_function_submodular(v, s.map.binary_dim()).has_value());

    // dropping z- >= z+ does not change the optimum
    if (n <= 3) {
      double all = infinity<double>(), coupled = infinity<double>();
      const Index m = s.map.binary_dim();
      for (Index mask = 0; mask < (Index(1) << m); ++mask) {
        BinaryVector z(m);
        for (Index k = 0; k < m; ++k) z[k] = (mask >> k) & 1;
        const double f = v(z) + s.cost.evaluate(z);
        all = std::min(all, f);
        bool ok = true;
        for (Index i : s.map.n_pm) ok = ok && z[s.map.minus_coordinate[i]] >= z[s.map.plus_coordinate[i]];
        if (ok) coupled = std::min(coupled, f);
      }
      CHECK(all == doctest::Approx(coupled).epsilon(1e-12));
    }
  }
}

TEST_CASE("set-function checker finds a supermodular pair") {
  const auto f = [](const BinaryVector& z) { return z[0] && z[1] ? 1.0 : 0.0; };
  const auto w = check_set_function_submodular(f, 2);
  REQUIRE(w.has_value());
  CHECK(w->lhs < w->rhs);
}

TEST_CASE("lattice membership") {
  const auto plus = check_lattice_membership(LatticeKind::l_plus, 1, 2, vec({1.5, 1}), vec({0, 0}));
  CHECK(plus.closed());
  CHECK(plus.meet == vec({0, 0}));
  CHECK(plus.join == vec({1.5, 1}));

  const auto pm = check_lattice_membership(LatticeKind::l_pm, -1, 1, vec({-0.5, 1, 0}), vec({0.7, 1, 1}));
  CHECK(pm.closed());
  CHECK(pm.meet == vec({-0.5, 1, 0}));
  CHECK(pm.join == vec({0.7, 1, 1}));

  const auto broken = check_lattice_membership(LatticeKind::l_plus, -1, 2, vec({-1, 1}), vec({0, 0}));
  CHECK_FALSE(broken.meet_member);
  CHECK(broken.meet == vec({-1, 0}));

  CHECK_THROWS_AS(check_lattice_membership(LatticeKind::l_plus, 1, 2, vec({0.5, 1}), vec({0, 0})), InputError);
  // L- points are (x, z-): z- = 0 leaves x in [l, u]
  CHECK(in_lattice_set(LatticeKind::l_minus, -2, -1, vec({-1.5, 0})));
  CHECK_FALSE(in_lattice_set(LatticeKind::l_minus, -2, -1, vec({-1.5, 1})));
  CHECK_FALSE(in_lattice_set(LatticeKind::l_minus, -2, -1, vec({-0.5, 0})));
}

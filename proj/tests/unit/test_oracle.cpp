#include <doctest.h>

#include "subind/boxqp.hpp"
#include "subind/oracle.hpp"

using namespace subind;

TEST_CASE("sampler is deterministic and Stieltjes") {
  InstanceSampler s;
  s.n = 7;
  s.seed = 123;
  for (std::uint64_t t = 0; t < 20; ++t) {
    const auto a = s.sample(t);
    const auto b = s.sample(t);
    CHECK(a.quad.Q == b.quad.Q);
    CHECK(a.quad.a == b.quad.a);
    CHECK(a.lower == b.lower);
    CHECK(is_stieltjes(a.quad.Q));
    for (Index i = 0; i < s.n; ++i) {
      const double margin = a.quad.Q(i, i) + (a.quad.Q.row(i).sum() - a.quad.Q(i, i));
      CHECK(margin >= 1e-3);
    }
  }
  CHECK(s.sample(0).quad.a != s.sample(1).quad.a);

  s.regime = BoundRegime::nonnegative;
  CHECK((s.sample(3).lower.array() >= 0).all());
  s.regime = BoundRegime::negative;
  CHECK((s.sample(3).upper.array() <= 0).all());
}

TEST_CASE("sampled MRF instances compile in both modes") {
  InstanceSampler s;
  s.n = 5;
  for (BoundRegime r : {BoundRegime::nonnegative, BoundRegime::mixed, BoundRegime::negative}) {
    s.regime = r;
    for (Mode m : {Mode::sparse, Mode::robust}) {
      const auto inst = s.sample_instance(4, m);
      CHECK(is_stieltjes(compile(inst).quad.Q));
    }
  }
}

TEST_CASE("brute force on a diagonal problem decomposes per coordinate") {
  InstanceSampler s;
  s.n = 6;
  s.density = 0.0;
  s.seed = 5;
  for (std::uint64_t t = 0; t < 10; ++t) {
    const auto p = s.sample(t);
    double expect = 0.0;
    for (Index i = 0; i < s.n; ++i) {
      const double q = p.quad.Q(i, i), a = p.quad.a[i];
      const double x = std::clamp(a / q, p.lower[i], p.upper[i]);
      expect += std::min(0.0, -a * x + 0.5 * q * x * x + p.costs[i]);
    }
    CHECK(brute_force(p).value == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("brute force with free indicators is one box QP") {
  InstanceSampler s;
  s.regime = BoundRegime::nonnegative;
  s.cost_scale = 0.0;
  auto p = s.sample(2);
  p.lower.setZero();
  Vector<double> lo = Vector<double>::Zero(s.n);
  CHECK(brute_force(p).value == doctest::Approx(boxqp::solve(p.quad, lo, p.upper).value));
}

TEST_CASE("brute force guard") {
  InstanceSampler s;
  s.n = 15;
  CHECK_THROWS_AS(brute_force(s.sample(0)), InputError);
}

TEST_CASE("property suite passes on clean instances") {
  InstanceSampler s;
  s.n = 8;
  s.regime = BoundRegime::nonnegative;
  s.seed = 1;
  const auto report = run_property_suite(s, 100);
  CHECK(report.all_passed());
  for (const auto& t : report.tallies) CHECK(t.passed + t.skipped == 100);
  CHECK_THROWS_AS(run_property_suite(s, 0), InputError);

  s.regime = BoundRegime::mixed;
  s.n = 5;
  CHECK(run_property_suite(s, 20).all_passed());
}

TEST_CASE("non-Stieltjes injection is reported and replayable") {
  InstanceSampler s;
  s.n = 4;
  s.adversarial_rate = 1.0;
  const auto report = run_property_suite(s, 3);
  CHECK_FALSE(report.all_passed());
  const auto& stieltjes = report.tallies.front();
  CHECK(stieltjes.check == Check::stieltjes);
  CHECK(stieltjes.failed == 3);
  for (std::size_t k = 1; k < report.tallies.size(); ++k) CHECK(report.tallies[k].skipped == 3);
  REQUIRE(stieltjes.witness.has_value());
  const auto replay = replay_witness(*stieltjes.witness);
  CHECK_FALSE(replay.passed);
  CHECK(replay.message == stieltjes.witness->at("message").get<std::string>());

  // the witness survives a JSON round trip
  const auto reparsed = io::Json::parse(stieltjes.witness->dump());
  CHECK_FALSE(replay_witness(reparsed).passed);
}

TEST_CASE("checks are deterministic per seed") {
  InstanceSampler s;
  s.n = 6;
  const auto p = s.sample(0);
  for (Check c : all_checks()) {
    const auto a = run_check(c, p, 42);
    const auto b = run_check(c, p, 42);
    CHECK(a.passed == b.passed);
    CHECK(a.details == b.details);
  }
  CHECK(parse_check("lovasz") == Check::lovasz);
  CHECK_THROWS_AS(parse_check("nope"), InputError);
}

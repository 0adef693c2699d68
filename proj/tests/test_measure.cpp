#include "tdnn/measure.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace tdnn;

TEST_CASE("total mass sums atom weights") {
  CHECK(ParticleMeasure::from_pairs({{0.5, 1.0}}).total_mass() == doctest::Approx(1.0));
  CHECK(ParticleMeasure::from_pairs({{0.2, 0.3}, {0.7, 0.7}}).total_mass() ==
        doctest::Approx(1.0));
  // direct summation oracle: 2.5 + 0.5 + 1.0
  CHECK(ParticleMeasure::from_pairs({{0.1, 2.5}, {0.9, 0.5}, {0.4, 1.0}}).total_mass() ==
        doctest::Approx(4.0));
}

TEST_CASE("normalization divides weights and keeps locations") {
  const auto mu = ParticleMeasure::from_pairs({{0.5, 2.0}}).normalized();
  CHECK(mu.atoms().front().location(0) == 0.5);
  CHECK(mu.atoms().front().weight == doctest::Approx(1.0));

  const auto nu = ParticleMeasure::from_pairs({{0.2, 1.0}, {0.8, 3.0}}).normalized();
  CHECK(nu.atoms()[0].weight == doctest::Approx(0.25));
  CHECK(nu.atoms()[1].weight == doctest::Approx(0.75));
  CHECK(nu.total_mass() == doctest::Approx(1.0).epsilon(1e-12));

  // idempotence
  const auto twice = nu.normalized();
  for (size_t i = 0; i < nu.size(); ++i) {
    CHECK(twice.atoms()[i].weight == doctest::Approx(nu.atoms()[i].weight).epsilon(1e-15));
  }
}

TEST_CASE("construction rejects invalid measures") {
  CHECK_THROWS_AS(ParticleMeasure({}, 1), std::invalid_argument);
  CHECK_THROWS_AS(ParticleMeasure({{Point::Constant(1, 0.5), 0.0}}, 1), std::invalid_argument);
  CHECK_THROWS_AS(ParticleMeasure({{Point::Constant(1, 0.5), -1.0}}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(ParticleMeasure({{Point::Constant(2, 0.5), 1.0}}, 1), std::invalid_argument);
}

TEST_CASE("integrate matches the weighted-sum oracle") {
  const auto mu = ParticleMeasure::from_pairs({{0.5, 1.0}});
  CHECK(integrate(TestFunction::monomial({1}), mu, true) == doctest::Approx(0.5));

  // 0.3·0.04 + 0.7·0.49 = 0.355 on the normalized measure
  const auto nu = ParticleMeasure::from_pairs({{0.2, 0.3}, {0.7, 0.7}});
  CHECK(integrate(TestFunction::monomial({2}), nu, true) == doctest::Approx(0.355));

  CHECK(integrate(TestFunction::constant_one(1), nu, true) == doctest::Approx(1.0));
}

TEST_CASE("integrate rejects dimension mismatch") {
  const auto mu = ParticleMeasure::from_pairs({{0.5, 1.0}});
  CHECK_THROWS_AS(integrate(TestFunction::monomial({1, 1}), mu, true), std::invalid_argument);
}

TEST_CASE("mgf evaluates the paper's moment generating function") {
  CHECK(mgf(ParticleMeasure::from_pairs({{0.0, 2.0}}), Point::Constant(1, 3.0)) ==
        doctest::Approx(2.0));

  const auto mu = ParticleMeasure::from_pairs({{0.3, 0.4}, {0.9, 1.3}});
  CHECK(mgf(mu, Point::Zero(1)) == doctest::Approx(mu.total_mass()));

  const auto nu = ParticleMeasure::from_pairs({{1.0, 1.0}, {-1.0, 1.0}});
  CHECK(mgf(nu, Point::Constant(1, 1.0)) ==
        doctest::Approx(std::exp(1.0) + std::exp(-1.0)));
}

TEST_CASE("mgf guards against exponent overflow") {
  const auto mu = ParticleMeasure::from_pairs({{800.0, 1.0}});
  CHECK_THROWS_AS(mgf(mu, Point::Constant(1, 1.0)), std::overflow_error);
  CHECK_THROWS_AS(mgf(mu, Point::Constant(1, -1.0)), std::overflow_error);
  CHECK_NOTHROW(mgf(mu, Point::Constant(1, 0.5)));
}

TEST_CASE("permuting atoms leaves integrals unchanged") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> loc(0.0, 1.0), wgt(0.1, 2.0);
  for (int round = 0; round < 50; ++round) {
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < 9; ++i) pairs.emplace_back(loc(rng), wgt(rng));
    const auto mu = ParticleMeasure::from_pairs(pairs);
    std::vector<size_t> perm(pairs.size());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto pi = mu.permuted(perm);
    CHECK(pi.total_mass() == doctest::Approx(mu.total_mass()).epsilon(1e-12));
    const auto g = TestFunction::monomial({3});
    CHECK(integrate(g, pi, true) == doctest::Approx(integrate(g, mu, true)).epsilon(1e-12));
  }
}

#include "tdnn/nets.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace tdnn;

namespace {

OutputNetwork single_block(const Eigen::MatrixXd& a, const Eigen::VectorXd& theta,
                           const Eigen::MatrixXd& beta) {
  HornikBlock block;
  block.input_weights = a;
  block.biases = theta;
  block.output_weights = beta;
  return OutputNetwork({block});
}

}  // namespace

TEST_CASE("hornik_eval hand checks") {
  SUBCASE("zero output weights give zero") {
    const auto net = single_block(Eigen::MatrixXd::Ones(1, 3), Eigen::VectorXd::Zero(3),
                                  Eigen::MatrixXd::Zero(1, 3));
    CHECK(hornik_eval(net, Eigen::VectorXd::Constant(1, 2.7))(0) == 0.0);
  }
  SUBCASE("tanh(0) = 0") {
    const auto net = single_block(Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1),
                                  Eigen::MatrixXd::Ones(1, 1));
    CHECK(hornik_eval(net, Eigen::VectorXd::Zero(1))(0) == 0.0);
  }
  SUBCASE("two units cancel") {
    Eigen::MatrixXd a(1, 2);
    a << 1.0, -1.0;
    Eigen::MatrixXd beta(1, 2);
    beta << 0.5, 0.5;
    const auto net = single_block(a, Eigen::VectorXd::Zero(2), beta);
    CHECK(hornik_eval(net, Eigen::VectorXd::Constant(1, 1.0))(0) ==
          doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("width mismatch throws") {
    const auto net = single_block(Eigen::MatrixXd::Ones(2, 2), Eigen::VectorXd::Zero(2),
                                  Eigen::MatrixXd::Ones(1, 2));
    CHECK_THROWS_AS(hornik_eval(net, Eigen::VectorXd::Zero(3)), std::invalid_argument);
  }
}

TEST_CASE("tnn_forward composes tests and head") {
  SUBCASE("projection pass-through") {
    TopologicalNetwork net{{TestFunction::projection(2, 0)},
                           scalar_head(1, [](const Eigen::VectorXd& z) { return z(0); })};
    CHECK(tnn_forward(net, (Point(2) << 0.3, 0.9).finished()) == doctest::Approx(0.3));
  }
  SUBCASE("polynomial identity z2 - z1^2 vanishes on (x, x^2)") {
    TopologicalNetwork net{
        {TestFunction::monomial({1}), TestFunction::monomial({2})},
        scalar_head(2, [](const Eigen::VectorXd& z) { return z(1) - z(0) * z(0); })};
    CHECK(tnn_forward(net, Point::Constant(1, 0.4)) == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("constant head") {
    TopologicalNetwork net{{TestFunction::monomial({1})},
                           scalar_head(1, [](const Eigen::VectorXd&) { return 2.5; })};
    CHECK(tnn_forward(net, Point::Constant(1, 0.1)) == 2.5);
    CHECK(tnn_forward(net, Point::Constant(1, 0.9)) == 2.5);
  }
  SUBCASE("domain violations propagate") {
    TopologicalNetwork net{{TestFunction::monomial({1})},
                           scalar_head(1, [](const Eigen::VectorXd& z) { return z(0); })};
    CHECK_THROWS_AS(tnn_forward(net, Point::Constant(1, 1.4)), std::domain_error);
  }
}

TEST_CASE("dnn_forward composes mass channel and normalized integrals") {
  SUBCASE("first coordinate pass-through sees arctan of the mass") {
    DistributionalNetwork net{MassChannel{},
                              {},
                              scalar_head(1, [](const Eigen::VectorXd& z) { return z(0); })};
    const auto mu = ParticleMeasure::from_pairs({{0.4, 0.25}, {0.6, 0.75}});
    CHECK(dnn_forward(net, mu) == doctest::Approx(M_PI / 4));
  }
  SUBCASE("normalized variance via moments") {
    DistributionalNetwork net{
        MassChannel{},
        {TestFunction::monomial({1}), TestFunction::monomial({2})},
        scalar_head(3, [](const Eigen::VectorXd& z) { return z(2) - z(1) * z(1); })};
    const auto mu = ParticleMeasure::from_pairs({{0.2, 0.3}, {0.7, 0.7}});
    CHECK(dnn_forward(net, mu) == doctest::Approx(0.0525));
  }
  SUBCASE("atom permutation invariance") {
    DistributionalNetwork net{
        MassChannel{},
        {TestFunction::monomial({1}), TestFunction::monomial({2})},
        OutputNetwork::hornik(3, 5, 1, Activation::tanh_, 99)};
    const auto mu = ParticleMeasure::from_pairs(
        {{0.1, 0.2}, {0.4, 1.1}, {0.8, 0.5}, {0.6, 0.9}});
    const auto pi = mu.permuted({3, 0, 2, 1});
    CHECK(dnn_forward(net, pi) == doctest::Approx(dnn_forward(net, mu)).epsilon(1e-12));
  }
}

TEST_CASE("practical_forward matches its definition") {
  std::mt19937_64 rng(5);
  SUBCASE("zero feature mix reduces to a function of mass") {
    PracticalNetwork net = random_practical(1, 4, 2, 3, Activation::tanh_, 7);
    net.inner_mix.setZero();
    const auto mu = ParticleMeasure::from_pairs({{0.3, 0.5}, {0.9, 1.1}});
    const double mass_only = [&] {
      double out = 0.0;
      Eigen::VectorXd psi = Eigen::VectorXd::Zero(3);
      psi(0) = std::atan(mu.total_mass());
      for (int j = 0; j < 3; ++j) {
        out += net.outer_scales(j) *
               std::tanh(net.outer_weights.col(j).dot(psi) - net.outer_biases(j));
      }
      return out;
    }();
    CHECK(practical_forward(net, mu) == doctest::Approx(mass_only).epsilon(1e-12));
    // mass is all that matters: same mass, different atoms
    const auto nu = ParticleMeasure::from_pairs({{0.1, 1.6}});
    CHECK(practical_forward(net, nu) == doctest::Approx(mass_only).epsilon(1e-12));
  }
  SUBCASE("single atom: the inner integral is exact") {
    PracticalNetwork net = random_practical(2, 3, 2, 2, Activation::tanh_, 8);
    const Point x = (Point(2) << 0.25, 0.75).finished();
    const ParticleMeasure mu({{x, 1.7}}, 2);
    Eigen::VectorXd pre = net.inner_weights.transpose() * x - net.inner_biases;
    for (Eigen::Index j = 0; j < pre.size(); ++j) pre(j) = std::tanh(pre(j));
    const Eigen::VectorXd exact = net.inner_mix * pre;
    const Eigen::VectorXd psi = net.psi(mu);
    CHECK(psi(1) == doctest::Approx(exact(0)).epsilon(1e-13));
    CHECK(psi(2) == doctest::Approx(exact(1)).epsilon(1e-13));
  }
  SUBCASE("atom permutation invariance") {
    const PracticalNetwork net = random_practical(1, 4, 3, 4, Activation::tanh_, 9);
    const auto mu = ParticleMeasure::from_pairs(
        {{0.3, 0.2}, {0.5, 1.4}, {0.8, 0.7}, {0.2, 0.4}, {0.6, 1.0}});
    const auto pi = mu.permuted({4, 2, 0, 3, 1});
    CHECK(practical_forward(net, pi) ==
          doctest::Approx(practical_forward(net, mu)).epsilon(1e-12));
  }
}

TEST_CASE("deep_set_eval") {
  SUBCASE("constant g with identity head counts the points") {
    const std::vector<TestFunction> g{TestFunction::constant_one(1)};
    const Head identity = scalar_head(1, [](const Eigen::VectorXd& z) { return z(0); });
    const std::vector<Point> points{Point::Constant(1, 0.1), Point::Constant(1, 0.5),
                                    Point::Constant(1, 0.9)};
    CHECK(deep_set_eval(g, identity, points) == doctest::Approx(3.0));
  }
  SUBCASE("sum of coordinates") {
    const std::vector<TestFunction> g{TestFunction::monomial({1})};
    const Head identity = scalar_head(1, [](const Eigen::VectorXd& z) { return z(0); });
    const std::vector<Point> points{Point::Constant(1, 0.2), Point::Constant(1, 0.7)};
    CHECK(deep_set_eval(g, identity, points) == doctest::Approx(0.9));
  }
  SUBCASE("permutation invariance and measure-form agreement") {
    const auto g = enumerate_family({FamilyKind::monomial, 1, false, {}}, 2);
    const OutputNetwork f = OutputNetwork::hornik(2, 4, 1, Activation::tanh_, 12);
    std::vector<Point> points{Point::Constant(1, 0.2), Point::Constant(1, 0.5),
                              Point::Constant(1, 0.8)};
    const double a = deep_set_eval(g, f, points);
    std::swap(points[0], points[2]);
    CHECK(deep_set_eval(g, f, points) == doctest::Approx(a).epsilon(1e-12));

    std::vector<Atom> atoms;
    for (const Point& p : points) atoms.push_back({p, 1.0});
    const ParticleMeasure mu(atoms, 1);
    Eigen::VectorXd z(2);
    z(0) = mu.total_mass() * integrate(g[0], mu, true);
    z(1) = mu.total_mass() * integrate(g[1], mu, true);
    CHECK(a == doctest::Approx(f.eval(z)(0)).epsilon(1e-9));
  }
}

TEST_CASE("network validation catches shape mismatches") {
  CHECK_THROWS_AS(
      dnn_forward(DistributionalNetwork{
                      MassChannel{},
                      {TestFunction::monomial({1})},
                      scalar_head(3, [](const Eigen::VectorXd& z) { return z(0); })},
                  ParticleMeasure::from_pairs({{0.5, 1.0}})),
      std::invalid_argument);
  CHECK_THROWS_AS(
      tnn_forward(TopologicalNetwork{
                      {TestFunction::monomial({1})},
                      scalar_head(2, [](const Eigen::VectorXd& z) { return z(0); })},
                  Point::Constant(1, 0.5)),
      std::invalid_argument);
}

TEST_CASE("mass-scale factorization with a mass-blind head") {
  DistributionalNetwork net{MassChannel{},
                            enumerate_family({FamilyKind::monomial, 1, false, {}}, 2),
                            OutputNetwork::hornik(3, 4, 1, Activation::tanh_, 21)};
  std::get<OutputNetwork>(net.head).layers().front().input_weights.row(0).setZero();
  const auto mu = ParticleMeasure::from_pairs({{0.25, 0.4}, {0.75, 1.2}});
  const double base = dnn_forward(net, mu);
  for (double c : {0.5, 2.0, 10.0}) {
    CHECK(dnn_forward(net, mu.scaled(c)) == doctest::Approx(base).epsilon(1e-9));
  }
}

#include "tdnn/checkpoint.hpp"
#include "tdnn/dataset.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

using namespace tdnn;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("tdnn_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("record format round trip") {
  std::vector<Atom> atoms;
  atoms.push_back({(Point(2) << 0.123456789012345, 0.9).finished(), 0.25});
  atoms.push_back({(Point(2) << 1.0 / 3.0, 0.5).finished(), 1e-7});
  const Record rec{ParticleMeasure(atoms, 2), -0.75};
  const Record back = parse_record(format_record(rec), 1);
  CHECK(back.label == rec.label);
  REQUIRE(back.measure.size() == 2);
  for (size_t i = 0; i < 2; ++i) {
    CHECK(back.measure.atoms()[i].weight == rec.measure.atoms()[i].weight);
    CHECK(back.measure.atoms()[i].location == rec.measure.atoms()[i].location);
  }
}

TEST_CASE("reader rejects invalid records with line numbers") {
  CHECK_THROWS_WITH_AS(parse_record("not json", 3),
                       doctest::Contains("line 3"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_record(R"({"atoms": [], "label": 0})", 7),
                       doctest::Contains("line 7"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      parse_record(R"({"atoms": [{"x": [0.5], "w": 0.0}], "label": 0})", 2),
      doctest::Contains("weight must be > 0"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      parse_record(R"({"atoms": [{"x": [0.5], "w": 1.0}, {"x": [0.1, 0.2], "w": 1.0}], "label": 0})",
                   5),
      doctest::Contains("dimensions differ"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_record(R"({"atoms": [{"x": [0.5], "w": 1.0}]})", 4),
                       doctest::Contains("line 4"), std::runtime_error);
}

TEST_CASE("dataset files round trip, skipping blank lines") {
  TempFile tmp("dataset.jsonl");
  Dataset data;
  data.push_back({ParticleMeasure::from_pairs({{0.1, 0.5}, {0.9, 1.5}}), 1.0});
  data.push_back({ParticleMeasure::from_pairs({{0.4, 2.0}}), 0.0});
  save_dataset(data, tmp.path);
  {
    std::ofstream app(tmp.path, std::ios::app);
    app << "\n";
  }
  const Dataset back = load_dataset(tmp.path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].label == 1.0);
  CHECK(back[1].measure.atoms()[0].weight == 2.0);

  {
    std::ofstream app(tmp.path, std::ios::app);
    app << R"({"atoms": [{"x": [0.2], "w": -1}], "label": 2})" << "\n";
  }
  CHECK_THROWS_WITH_AS(load_dataset(tmp.path), doctest::Contains("line 4"),
                       std::runtime_error);
}

TEST_CASE("checkpoints are value-exact for every model kind") {
  TempFile tmp("model.json");
  const auto roundtrip_exact = [&](const Model& model) {
    save_checkpoint(model, tmp.path);
    const Model back = load_checkpoint(tmp.path);
    CHECK(flatten_params(back) == flatten_params(model));
    return back;
  };

  SUBCASE("linear") {
    const Model m = LinearModel{1.0 / 3.0};
    const Model back = roundtrip_exact(m);
    CHECK(std::get<LinearModel>(back).weight == 1.0 / 3.0);
  }
  SUBCASE("distributional with all test kinds") {
    std::vector<TestFunction> tests;
    tests.push_back(TestFunction::monomial({2}));
    tests.push_back(TestFunction::exp_feature(Point::Constant(1, 0.1234567890123456), true));
    tests.push_back(TestFunction::bump(Point::Constant(1, 2.0 / 3.0), 1.75, true));
    tests.push_back(product(TestFunction::monomial({1}),
                            TestFunction::exp_feature(Point::Constant(1, -0.7))));
    const Model m = DistributionalNetwork{
        MassChannel{}, std::move(tests),
        OutputNetwork::hornik(5, 4, 1, Activation::tanh_, 101)};
    const Model back = roundtrip_exact(m);
    const auto mu = ParticleMeasure::from_pairs({{0.3, 0.7}, {0.8, 0.2}});
    CHECK(model_predict(back, {mu, 0.0}) == model_predict(m, {mu, 0.0}));
  }
  SUBCASE("topological") {
    const Model m = TopologicalNetwork{
        enumerate_family({FamilyKind::projection, 2, false, {}}, 2),
        OutputNetwork::hornik(2, 3, 1, Activation::logistic, 55)};
    roundtrip_exact(m);
  }
  SUBCASE("practical") {
    const Model m = random_practical(2, 4, 3, 5, Activation::tanh_, 77);
    const Model back = roundtrip_exact(m);
    std::vector<Atom> atoms{{(Point(2) << 0.2, 0.9).finished(), 0.6}};
    const ParticleMeasure mu(atoms, 2);
    CHECK(model_predict(back, {mu, 0.0}) == model_predict(m, {mu, 0.0}));
  }
}

TEST_CASE("generic heads and custom channels are rejected by the checkpoint") {
  const Model m = DistributionalNetwork{
      MassChannel{}, {}, scalar_head(1, [](const Eigen::VectorXd& z) { return z(0); })};
  CHECK_THROWS_AS(model_to_json(m), std::runtime_error);

  MassChannel custom;
  custom.name = "logistic-ish";
  custom.fn = [](double m_) { return m_ / (1.0 + m_); };
  const Model c = DistributionalNetwork{custom, {},
                                        OutputNetwork::hornik(1, 2, 1, Activation::tanh_, 1)};
  CHECK_THROWS_AS(model_to_json(c), std::runtime_error);
}

TEST_CASE("checkpoint files parse strictly") {
  TempFile tmp("broken.json");
  {
    std::ofstream out(tmp.path);
    out << "{\"kind\": \"unknown\"}";
  }
  CHECK_THROWS_AS(load_checkpoint(tmp.path), std::runtime_error);
  CHECK_THROWS_AS(load_checkpoint("does_not_exist.json"), std::runtime_error);
}

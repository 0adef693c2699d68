#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

#ifndef TDNN_CLI_PATH
#define TDNN_CLI_PATH ""
#endif

struct CliFixture {
  fs::path dir;
  std::string cli = TDNN_CLI_PATH;

  CliFixture() {
    dir = fs::temp_directory_path() /
          ("tdnn_cli_tests_" + std::to_string(static_cast<long>(::getpid())));
    fs::create_directories(dir);
  }
  ~CliFixture() { fs::remove_all(dir); }

  int run(const std::string& args, const std::string& out_file = "out.txt") const {
    const std::string cmd = "cd " + dir.string() + " && " + cli + " " + args + " > " +
                            out_file + " 2> err.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream out(dir / name);
    out << text;
  }

  std::string slurp(const std::string& name) const {
    std::ifstream in(dir / name);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }

  json out_json(const std::string& name = "out.txt") const { return json::parse(slurp(name)); }
};

}  // namespace

TEST_CASE("gen-data writes the configured number of records") {
  CliFixture fx;
  fx.write("gen.json",
           R"({"kind": "functional", "target": "normalized_mean", "count": 30, "seed": 3,
               "out": "data.jsonl"})");
  CHECK(fx.run("gen-data --config gen.json") == 0);
  CHECK(fx.out_json()["records"] == 30);
  int lines = 0;
  std::istringstream stream(fx.slurp("data.jsonl"));
  for (std::string line; std::getline(stream, line);) {
    if (!line.empty()) ++lines;
  }
  CHECK(lines == 30);
}

TEST_CASE("malformed configs exit with code 2 and the failing key path") {
  CliFixture fx;
  fx.write("bad.json", R"({"kind": "functional", "target": "normalized_mean", "count": 5,
                           "atom_count": 3})");
  CHECK(fx.run("gen-data --config bad.json") == 2);
  CHECK(fx.slurp("err.txt").find("atom_count") != std::string::npos);

  fx.write("no_dataset.json", R"({"model": {"kind": "linear"}})");
  CHECK(fx.run("train --config no_dataset.json") == 2);
  CHECK(fx.slurp("err.txt").find("dataset") != std::string::npos);

  fx.write("bad_nested.json",
           R"({"dataset": "x.jsonl", "model": {"kind": "dnn",
               "family": {"family": "monomial", "count": 2, "extra": 1}}})");
  CHECK(fx.run("train --config bad_nested.json") == 2);
  CHECK(fx.slurp("err.txt").find("model.family.extra") != std::string::npos);

  // a dataset path that is present but unreadable is a runtime failure
  fx.write("missing_file.json",
           R"({"dataset": "nope.jsonl", "model": {"kind": "linear"}})");
  CHECK(fx.run("train --config missing_file.json") == 1);
}

TEST_CASE("train fits the linear toy dataset to below 1e-6 risk") {
  CliFixture fx;
  {
    std::ofstream data(fx.dir / "linear.jsonl");
    for (int i = 0; i < 20; ++i) {
      const double x = 0.1 + 0.04 * i;
      data << R"({"atoms": [{"x": [)" << x << R"(], "w": 1.0}], "label": )" << 1.7 * x
           << "}\n";
    }
  }
  fx.write("train.json",
           R"({"dataset": "linear.jsonl", "out": "model.json", "loss": "squared",
               "model": {"kind": "linear"},
               "optimizer": {"kind": "gd", "step": 0.5, "iterations": 500}})");
  REQUIRE(fx.run("train --config train.json") == 0);
  const json report = fx.out_json();
  CHECK(report["final_risk"].get<double>() < 1e-6);

  SUBCASE("eval on the training set reproduces the final trace risk") {
    fx.write("eval.json", R"({"checkpoint": "model.json", "dataset": "linear.jsonl"})");
    REQUIRE(fx.run("eval --config eval.json") == 0);
    const json eval_report = fx.out_json();
    CHECK(std::abs(eval_report["mean_risk"].get<double>() -
                   report["final_risk"].get<double>()) < 1e-12);
    CHECK(eval_report.contains("n"));
    CHECK(eval_report.contains("max_abs_err"));
  }

  SUBCASE("trace CSV carries the documented header and final risk") {
    const std::string trace = fx.slurp("trace.csv");
    CHECK(trace.rfind("iter,risk\n", 0) == 0);
    const auto last_comma = trace.find_last_of(',');
    CHECK(std::stod(trace.substr(last_comma + 1)) < 1e-6);
  }
}

TEST_CASE("metric breakdown is additive and isolates the mass term on scaled pairs") {
  CliFixture fx;
  {
    std::ofstream data(fx.dir / "pairs.jsonl");
    data << R"({"atoms": [{"x": [0.2], "w": 0.4}, {"x": [0.8], "w": 0.6}], "label": 0})"
         << "\n";
    data << R"({"atoms": [{"x": [0.2], "w": 0.8}, {"x": [0.8], "w": 1.2}], "label": 0})"
         << "\n";
    data << R"({"atoms": [{"x": [0.5], "w": 1.0}], "label": 0})" << "\n";
  }
  fx.write("metric.json", R"({"dataset": "pairs.jsonl"})");

  REQUIRE(fx.run("metric --config metric.json --record-a 1 --record-b 1") == 0);
  CHECK(fx.out_json()["total"].get<double>() == 0.0);

  REQUIRE(fx.run("metric --config metric.json --record-a 0 --record-b 2") == 0);
  const json mixed = fx.out_json();
  double sum = mixed["mass_term"].get<double>();
  for (const auto& t : mixed["test_terms"]) sum += t.get<double>();
  CHECK(std::abs(sum - mixed["total"].get<double>()) < 1e-12);

  // records 0 and 1 are scaled copies: the test terms must vanish
  REQUIRE(fx.run("metric --config metric.json --record-a 0 --record-b 1") == 0);
  const json scaled = fx.out_json();
  CHECK(scaled["mass_term"].get<double>() > 0.0);
  double tail = 0.0;
  for (const auto& t : scaled["test_terms"]) tail += t.get<double>();
  CHECK(tail < 1e-12);
}

TEST_CASE("verify exits zero and reports every suite") {
  CliFixture fx;
  REQUIRE(fx.run("verify --seed 12") == 0);
  const std::string out = fx.slurp("out.txt");
  CHECK(out.find("PASS measure.integrate_linearity") != std::string::npos);
  CHECK(out.find("\"all_passed\":true") != std::string::npos);
  CHECK(fx.run("verify --seed 12 --sabotage") == 1);
}

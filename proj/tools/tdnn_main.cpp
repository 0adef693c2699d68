// tdnn — command line front end: data generation, training, evaluation,
// metric breakdowns and the property-verification suites.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration failure.

#include "tdnn/checkpoint.hpp"
#include "tdnn/dataset.hpp"
#include "tdnn/metrics.hpp"
#include "tdnn/nets.hpp"
#include "tdnn/simulate.hpp"
#include "tdnn/training.hpp"
#include "tdnn/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <string>

namespace {

using nlohmann::json;
using namespace tdnn;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("invalid config " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  return doc;
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& path) {
  for (const auto& [key, _] : obj.items()) {
    if (allowed.find(key) == allowed.end()) {
      throw ConfigError("config: unknown key \"" + (path.empty() ? key : path + "." + key) +
                        "\"");
    }
  }
}

template <typename T>
T require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) {
    throw ConfigError("config: missing key \"" + (path.empty() ? key : path + "." + key) +
                      "\"");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value for \"" + (path.empty() ? key : path + "." + key) +
                      "\"");
  }
}

template <typename T>
T value_or(const json& obj, const std::string& key, T fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value for \"" + (path.empty() ? key : path + "." + key) +
                      "\"");
  }
}

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

std::uint64_t resolve_seed(const CommonFlags& flags, const json& cfg) {
  if (flags.seed) return *flags.seed;
  return value_or<std::uint64_t>(cfg, "seed", 0, "");
}

std::string resolve_out(const CommonFlags& flags, const json& cfg,
                        const std::string& key, const std::string& fallback) {
  if (flags.out) return *flags.out;
  return value_or<std::string>(cfg, key, fallback, "");
}

// ----------------------------------------------------------------- gen-data

HmmSpec parse_regime(const json& doc, const std::string& path) {
  reject_unknown_keys(doc, {"init_mean", "init_var", "trans_coef", "trans_offset",
                            "trans_var", "obs_coef", "obs_var", "horizon", "label"},
                      path);
  HmmSpec spec;
  spec.init_mean = value_or(doc, "init_mean", 0.0, path);
  spec.init_var = value_or(doc, "init_var", 1.0, path);
  spec.trans_coef = value_or(doc, "trans_coef", 1.0, path);
  spec.trans_offset = value_or(doc, "trans_offset", 0.0, path);
  spec.trans_var = value_or(doc, "trans_var", 1.0, path);
  spec.obs_coef = value_or(doc, "obs_coef", 1.0, path);
  spec.obs_var = value_or(doc, "obs_var", 1.0, path);
  spec.horizon = value_or(doc, "horizon", 1, path);
  spec.regime_label = value_or(doc, "label", 0, path);
  try {
    spec.validate();
  } catch (const std::exception& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  return spec;
}

int cmd_gen_data(const CommonFlags& flags) {
  const json cfg = load_config(flags.config_path);
  reject_unknown_keys(cfg, {"kind", "seed", "out", "target", "count", "atoms_min",
                            "atoms_max", "runs_per_regime", "particles", "regimes"},
                      "");
  const std::string kind = require<std::string>(cfg, "kind", "");
  const std::uint64_t seed = resolve_seed(flags, cfg);
  const std::string out = resolve_out(flags, cfg, "out", "dataset.jsonl");

  Dataset data;
  if (kind == "functional") {
    const auto target = [&] {
      try {
        return target_from_name(require<std::string>(cfg, "target", ""));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
    }();
    data = make_functional_dataset(target, require<int>(cfg, "count", ""),
                                   value_or(cfg, "atoms_min", 1, ""),
                                   value_or(cfg, "atoms_max", 8, ""), seed);
  } else if (kind == "belief") {
    if (!cfg.contains("regimes") || !cfg["regimes"].is_array() || cfg["regimes"].size() < 2) {
      throw ConfigError("config: \"regimes\" must list at least two regimes");
    }
    std::vector<HmmSpec> regimes;
    for (size_t i = 0; i < cfg["regimes"].size(); ++i) {
      regimes.push_back(parse_regime(cfg["regimes"][i], "regimes[" + std::to_string(i) + "]"));
    }
    data = make_belief_dataset(regimes, require<int>(cfg, "runs_per_regime", ""),
                               value_or(cfg, "particles", 100, ""), seed);
  } else {
    throw ConfigError("config: unknown kind \"" + kind + "\"");
  }
  save_dataset(data, out);
  std::cout << json{{"records", data.size()}, {"out", out}}.dump() << '\n';
  return 0;
}

// -------------------------------------------------------------------- train

void validate_family_schema(const json& family, const std::string& path) {
  reject_unknown_keys(family, {"family", "count", "trainable", "dim"}, path);
  const std::string name = require<std::string>(family, "family", path);
  try {
    family_kind_from_name(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  require<int>(family, "count", path);
}

void validate_model_schema(const json& model_cfg) {
  reject_unknown_keys(model_cfg,
                      {"kind", "family", "hidden", "activation", "init_weight", "dim",
                       "inner_hidden", "feature_count", "outer_hidden"},
                      "model");
  const std::string kind = require<std::string>(model_cfg, "kind", "model");
  if (kind != "linear" && kind != "tnn" && kind != "dnn" && kind != "practical") {
    throw ConfigError("config: unknown model kind \"" + kind + "\"");
  }
  if (kind == "tnn" || kind == "dnn") {
    if (!model_cfg.contains("family")) {
      throw ConfigError("config: missing key \"model.family\"");
    }
    validate_family_schema(model_cfg["family"], "model.family");
  }
}

std::vector<TestFunction> build_tests(const json& family, int data_dim, std::uint64_t seed) {
  reject_unknown_keys(family, {"family", "count", "trainable", "dim"}, "model.family");
  const std::string name = require<std::string>(family, "family", "model.family");
  const int count = require<int>(family, "count", "model.family");
  const bool trainable = value_or(family, "trainable", false, "model.family");
  const int dim = value_or(family, "dim", data_dim, "model.family");
  FamilyKind kind;
  try {
    kind = family_kind_from_name(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: model.family: ") + e.what());
  }
  if (kind == FamilyKind::exp && trainable) {
    // learned MGF evaluation points: centered uniform, scaled by 1/sqrt(D)
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    std::vector<TestFunction> tests;
    tests.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
      Point v(dim);
      for (int d = 0; d < dim; ++d) v(d) = unit(rng) * scale;
      tests.push_back(TestFunction::exp_feature(v, true));
    }
    return tests;
  }
  try {
    return enumerate_family({kind, dim, trainable, {}}, count);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: model.family: ") + e.what());
  }
}

Model build_model(const json& model_cfg, int data_dim, std::uint64_t seed) {
  reject_unknown_keys(model_cfg,
                      {"kind", "family", "hidden", "activation", "init_weight", "dim",
                       "inner_hidden", "feature_count", "outer_hidden"},
                      "model");
  const std::string kind = require<std::string>(model_cfg, "kind", "model");
  const Activation act = [&] {
    try {
      return activation_from_name(value_or<std::string>(model_cfg, "activation", "tanh",
                                                        "model"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: model: ") + e.what());
    }
  }();
  if (kind == "linear") {
    return LinearModel{value_or(model_cfg, "init_weight", 0.0, "model")};
  }
  if (kind == "tnn" || kind == "dnn") {
    if (!model_cfg.contains("family")) throw ConfigError("config: missing key \"model.family\"");
    std::vector<TestFunction> tests = build_tests(model_cfg["family"], data_dim, seed + 1);
    const int hidden = value_or(model_cfg, "hidden", 16, "model");
    if (hidden < 1) throw ConfigError("config: model.hidden must be >= 1");
    if (kind == "tnn") {
      const int in = static_cast<int>(tests.size());
      return TopologicalNetwork{std::move(tests),
                                OutputNetwork::hornik(in, hidden, 1, act, seed)};
    }
    const int in = 1 + static_cast<int>(tests.size());
    return DistributionalNetwork{MassChannel{}, std::move(tests),
                                 OutputNetwork::hornik(in, hidden, 1, act, seed)};
  }
  if (kind == "practical") {
    const int dim = value_or(model_cfg, "dim", data_dim, "model");
    return random_practical(dim, value_or(model_cfg, "inner_hidden", 8, "model"),
                            value_or(model_cfg, "feature_count", 4, "model"),
                            value_or(model_cfg, "outer_hidden", 8, "model"), act, seed);
  }
  throw ConfigError("config: unknown model kind \"" + kind + "\"");
}

TrainConfig build_train_config(const json& cfg, std::uint64_t seed) {
  TrainConfig tc;
  tc.seed = seed;
  if (!cfg.contains("optimizer")) return tc;
  const json& opt = cfg["optimizer"];
  reject_unknown_keys(opt,
                      {"kind", "step", "momentum", "iterations", "batch", "gradient_mode",
                       "fd_step"},
                      "optimizer");
  const std::string kind = value_or<std::string>(opt, "kind", "gd", "optimizer");
  if (kind == "gd") {
    tc.optimizer = Optimizer::gradient_descent;
  } else if (kind == "momentum") {
    tc.optimizer = Optimizer::momentum;
  } else {
    throw ConfigError("config: optimizer.kind must be \"gd\" or \"momentum\"");
  }
  tc.step = value_or(opt, "step", 1e-2, "optimizer");
  tc.momentum_coef = value_or(opt, "momentum", 0.9, "optimizer");
  tc.iterations = value_or(opt, "iterations", 100, "optimizer");
  tc.batch = value_or(opt, "batch", 0, "optimizer");
  const std::string mode = value_or<std::string>(opt, "gradient_mode", "analytic", "optimizer");
  if (mode == "analytic") {
    tc.mode = GradientMode::analytic;
  } else if (mode == "fd") {
    tc.mode = GradientMode::finite_difference;
  } else {
    throw ConfigError("config: optimizer.gradient_mode must be \"analytic\" or \"fd\"");
  }
  tc.fd_step = value_or(opt, "fd_step", 1e-5, "optimizer");
  try {
    tc.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: optimizer: ") + e.what());
  }
  return tc;
}

LossSpec build_loss(const json& cfg) {
  try {
    return LossSpec{loss_kind_from_name(value_or<std::string>(cfg, "loss", "squared", ""))};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

void write_trace_csv(const std::vector<double>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace: " + path);
  out << "iter,risk\n";
  out.precision(17);
  for (size_t i = 0; i < trace.size(); ++i) out << i << ',' << trace[i] << '\n';
  if (!out) throw std::runtime_error("failed writing trace: " + path);
}

int cmd_train(const CommonFlags& flags) {
  const json cfg = load_config(flags.config_path);
  reject_unknown_keys(cfg, {"dataset", "seed", "out", "trace_out", "loss", "model",
                            "optimizer"},
                      "");
  const std::uint64_t seed = resolve_seed(flags, cfg);
  const std::string dataset_path = require<std::string>(cfg, "dataset", "");
  if (!cfg.contains("model")) throw ConfigError("config: missing key \"model\"");
  // config problems surface before any dataset work
  validate_model_schema(cfg["model"]);
  const LossSpec loss = build_loss(cfg);
  const TrainConfig tc = build_train_config(cfg, seed);

  const Dataset data = load_dataset(dataset_path);
  Model model = build_model(cfg["model"], data.front().measure.dim(), seed);

  const FitResult result = fit(std::move(model), data, loss, tc);

  const std::string out = resolve_out(flags, cfg, "out", "model.json");
  const std::string trace_out = value_or<std::string>(cfg, "trace_out", "trace.csv", "");
  save_checkpoint(result.model, out);
  write_trace_csv(result.risk_trace, trace_out);
  std::cout << json{{"final_risk", result.risk_trace.back()},
                    {"iterations", result.risk_trace.size() - 1},
                    {"checkpoint", out},
                    {"trace", trace_out}}
                   .dump()
            << '\n';
  return 0;
}

// --------------------------------------------------------------------- eval

int cmd_eval(const CommonFlags& flags) {
  const json cfg = load_config(flags.config_path);
  reject_unknown_keys(cfg, {"checkpoint", "dataset", "loss", "seed", "out"}, "");
  const Model model = load_checkpoint(require<std::string>(cfg, "checkpoint", ""));
  const Dataset data = load_dataset(require<std::string>(cfg, "dataset", ""));
  const LossSpec loss = build_loss(cfg);

  CompensatedSum risk_acc;
  double max_abs_err = 0.0;
  int correct = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    const double yhat = model_predict(model, data[i]);
    risk_acc.add(loss.value(yhat, data[i].label));
    max_abs_err = std::max(max_abs_err, std::abs(yhat - data[i].label));
    if ((yhat > 0.0) == (data[i].label > 0.5)) ++correct;
  }
  json report{{"n", data.size()},
              {"mean_risk", risk_acc.value() / static_cast<double>(data.size())},
              {"max_abs_err", max_abs_err}};
  if (loss.kind == LossKind::logistic) {
    report["accuracy"] = static_cast<double>(correct) / static_cast<double>(data.size());
  }
  const std::string text = report.dump();
  std::cout << text << '\n';
  if (flags.out || cfg.contains("out")) {
    const std::string out = resolve_out(flags, cfg, "out", "eval.json");
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write report: " + out);
    f << text << '\n';
  }
  return 0;
}

// ------------------------------------------------------------------- metric

int cmd_metric(const CommonFlags& flags, int record_a, int record_b) {
  const json cfg = load_config(flags.config_path);
  reject_unknown_keys(cfg, {"dataset", "family", "record_a", "record_b", "seed", "out"}, "");
  const Dataset data = load_dataset(require<std::string>(cfg, "dataset", ""));
  const int a = record_a >= 0 ? record_a : value_or(cfg, "record_a", 0, "");
  const int b = record_b >= 0 ? record_b : value_or(cfg, "record_b", 0, "");
  if (a < 0 || b < 0 || a >= static_cast<int>(data.size()) ||
      b >= static_cast<int>(data.size())) {
    throw ConfigError("config: record indices out of range");
  }
  SSPMetricConfig metric_cfg;
  if (cfg.contains("family")) {
    metric_cfg.family = build_tests(cfg["family"], data.front().measure.dim(), 0);
  } else {
    // default truncation N = 16: the family occupies weight indices 2..16
    metric_cfg.family =
        enumerate_family({FamilyKind::monomial, data.front().measure.dim(), false, {}}, 15);
  }
  const auto breakdown =
      measure_metric_breakdown(metric_cfg, data[static_cast<size_t>(a)].measure,
                               data[static_cast<size_t>(b)].measure);
  json doc{{"record_a", a},
           {"record_b", b},
           {"mass_term", breakdown.mass_term},
           {"test_terms", breakdown.test_terms},
           {"total", breakdown.total}};
  const std::string text = doc.dump();
  std::cout << text << '\n';
  if (flags.out || cfg.contains("out")) {
    const std::string out = resolve_out(flags, cfg, "out", "metric.json");
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write report: " + out);
    f << text << '\n';
  }
  return 0;
}

// ------------------------------------------------------------------- verify

int cmd_verify(const CommonFlags& flags, bool sabotage) {
  VerifyOptions options;
  if (!flags.config_path.empty()) {
    const json cfg = load_config(flags.config_path);
    reject_unknown_keys(cfg, {"seed", "sabotage"}, "");
    options.seed = value_or<std::uint64_t>(cfg, "seed", options.seed, "");
    options.sabotage_metric = value_or(cfg, "sabotage", false, "");
  }
  if (flags.seed) options.seed = *flags.seed;
  if (sabotage) options.sabotage_metric = true;

  const auto results = run_verification(options);
  json suites = json::array();
  bool all_passed = true;
  for (const SuiteResult& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " cases=" << r.cases;
    if (!r.passed) std::cout << " counterexample: " << r.detail;
    std::cout << '\n';
    suites.push_back({{"name", r.name},
                      {"passed", r.passed},
                      {"cases", r.cases},
                      {"counterexample", r.detail}});
    all_passed = all_passed && r.passed;
  }
  const json report{{"suites", std::move(suites)}, {"all_passed", all_passed}};
  std::cout << report.dump() << '\n';
  if (flags.out) {
    std::ofstream f(*flags.out);
    if (!f) throw std::runtime_error("cannot write report: " + *flags.out);
    f << report.dump() << '\n';
  }
  return all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"topological and distributional neural networks"};
  app.require_subcommand(1);

  CommonFlags gen_flags, train_flags, eval_flags, metric_flags, verify_flags;
  int record_a = -1, record_b = -1;
  bool sabotage = false;

  auto add_common = [](CLI::App* cmd, CommonFlags& flags, bool config_required) {
    auto* opt = cmd->add_option("--config", flags.config_path, "config document (JSON)");
    if (config_required) opt->required();
    cmd->add_option("--seed", flags.seed, "seed override");
    cmd->add_option("--out", flags.out, "output path override");
  };

  auto* gen = app.add_subcommand("gen-data", "generate a dataset");
  add_common(gen, gen_flags, true);
  auto* train = app.add_subcommand("train", "fit a model, write checkpoint + trace");
  add_common(train, train_flags, true);
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  add_common(eval, eval_flags, true);
  auto* metric = app.add_subcommand("metric", "measure metric between two records");
  add_common(metric, metric_flags, true);
  metric->add_option("--record-a", record_a, "first record index");
  metric->add_option("--record-b", record_b, "second record index");
  auto* verify = app.add_subcommand("verify", "run the property-verification suites");
  add_common(verify, verify_flags, false);
  verify->add_flag("--sabotage", sabotage, "inject a metric fault (the suite must fail)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_flags);
    if (train->parsed()) return cmd_train(train_flags);
    if (eval->parsed()) return cmd_eval(eval_flags);
    if (metric->parsed()) return cmd_metric(metric_flags, record_a, record_b);
    if (verify->parsed()) return cmd_verify(verify_flags, sabotage);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

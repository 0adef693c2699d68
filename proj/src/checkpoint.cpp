#include "tdnn/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

namespace tdnn {

using nlohmann::json;

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& doc, Eigen::Index expected) {
  if (!doc.is_array() || static_cast<Eigen::Index>(doc.size()) != expected) {
    throw std::runtime_error("checkpoint: bad vector length");
  }
  Eigen::VectorXd v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) v(i) = doc[static_cast<size_t>(i)].get<double>();
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& doc, Eigen::Index rows, Eigen::Index cols) {
  if (!doc.is_array() || static_cast<Eigen::Index>(doc.size()) != rows * cols) {
    throw std::runtime_error("checkpoint: bad matrix length");
  }
  Eigen::MatrixXd m(rows, cols);
  size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = doc[k++].get<double>();
  }
  return m;
}

json head_to_json(const Head& head) {
  const auto* net = std::get_if<OutputNetwork>(&head);
  if (net == nullptr) {
    throw std::runtime_error("checkpoint: generic heads are not serializable");
  }
  json layers = json::array();
  for (const HornikBlock& b : net->layers()) {
    layers.push_back({{"input_width", b.input_width()},
                      {"hidden_width", b.hidden_width()},
                      {"output_width", b.output_width()},
                      {"activation", activation_name(b.act)},
                      {"input_weights", matrix_to_json(b.input_weights)},
                      {"biases", vector_to_json(b.biases)},
                      {"output_weights", matrix_to_json(b.output_weights)}});
  }
  return json{{"layers", std::move(layers)}};
}

OutputNetwork head_from_json(const json& doc) {
  std::vector<HornikBlock> layers;
  for (const auto& l : doc.at("layers")) {
    HornikBlock b;
    const auto k = l.at("input_width").get<Eigen::Index>();
    const auto n = l.at("hidden_width").get<Eigen::Index>();
    const auto m = l.at("output_width").get<Eigen::Index>();
    b.act = activation_from_name(l.at("activation").get<std::string>());
    b.input_weights = matrix_from_json(l.at("input_weights"), k, n);
    b.biases = vector_from_json(l.at("biases"), n);
    b.output_weights = matrix_from_json(l.at("output_weights"), m, n);
    layers.push_back(std::move(b));
  }
  return OutputNetwork(std::move(layers));
}

std::string mass_channel_to_json(const MassChannel& g0) {
  if (g0.fn) throw std::runtime_error("checkpoint: custom mass channels are not serializable");
  return g0.name;
}

json tests_to_json(const std::vector<TestFunction>& tests) {
  json out = json::array();
  for (const TestFunction& g : tests) out.push_back(test_function_to_json(g));
  return out;
}

std::vector<TestFunction> tests_from_json(const json& doc) {
  std::vector<TestFunction> tests;
  for (const auto& t : doc) tests.push_back(test_function_from_json(t));
  return tests;
}

}  // namespace

json test_function_to_json(const TestFunction& g) {
  const auto& node = g.node();
  if (const auto* m = std::get_if<Monomial>(&node)) {
    return json{{"type", "monomial"}, {"powers", m->powers}};
  }
  if (const auto* e = std::get_if<ExpFeature>(&node)) {
    return json{{"type", "exp"},
                {"v", vector_to_json(e->direction)},
                {"trainable", e->trainable}};
  }
  if (const auto* p = std::get_if<Projection>(&node)) {
    return json{{"type", "projection"}, {"dim", p->dim}, {"index", p->index}};
  }
  if (const auto* b = std::get_if<Bump>(&node)) {
    if (b->metric) {
      throw std::runtime_error("checkpoint: custom bump metrics are not serializable");
    }
    return json{{"type", "bump"},
                {"center", vector_to_json(b->center)},
                {"scale", b->scale},
                {"trainable", b->trainable}};
  }
  const auto& prod = std::get<ProductNode>(node);
  return json{{"type", "product"},
              {"left", test_function_to_json(*prod.left)},
              {"right", test_function_to_json(*prod.right)}};
}

TestFunction test_function_from_json(const json& doc) {
  const std::string type = doc.at("type").get<std::string>();
  if (type == "monomial") {
    return TestFunction::monomial(doc.at("powers").get<std::vector<int>>());
  }
  if (type == "exp") {
    const auto& v = doc.at("v");
    return TestFunction::exp_feature(
        vector_from_json(v, static_cast<Eigen::Index>(v.size())),
        doc.value("trainable", false));
  }
  if (type == "projection") {
    return TestFunction::projection(doc.at("dim").get<int>(), doc.at("index").get<int>());
  }
  if (type == "bump") {
    const auto& c = doc.at("center");
    return TestFunction::bump(vector_from_json(c, static_cast<Eigen::Index>(c.size())),
                              doc.at("scale").get<double>(), doc.value("trainable", false));
  }
  if (type == "product") {
    return TestFunction::product_of(test_function_from_json(doc.at("left")),
                                    test_function_from_json(doc.at("right")));
  }
  throw std::runtime_error("checkpoint: unknown test function type: " + type);
}

json model_to_json(const Model& model) {
  return std::visit(
      [](const auto& net) -> json {
        using T = std::decay_t<decltype(net)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          return json{{"kind", "linear"}, {"weight", net.weight}};
        } else if constexpr (std::is_same_v<T, TopologicalNetwork>) {
          return json{{"kind", "tnn"},
                      {"tests", tests_to_json(net.tests)},
                      {"head", head_to_json(net.head)}};
        } else if constexpr (std::is_same_v<T, DistributionalNetwork>) {
          return json{{"kind", "dnn"},
                      {"mass_channel", mass_channel_to_json(net.mass_channel)},
                      {"tests", tests_to_json(net.tests)},
                      {"head", head_to_json(net.head)}};
        } else {
          return json{{"kind", "practical"},
                      {"mass_channel", mass_channel_to_json(net.mass_channel)},
                      {"activation", activation_name(net.act)},
                      {"input_dim", net.input_dim()},
                      {"inner_hidden", static_cast<int>(net.inner_weights.cols())},
                      {"feature_count", static_cast<int>(net.inner_mix.rows())},
                      {"outer_hidden", static_cast<int>(net.outer_weights.cols())},
                      {"inner_weights", matrix_to_json(net.inner_weights)},
                      {"inner_mix", matrix_to_json(net.inner_mix)},
                      {"inner_biases", vector_to_json(net.inner_biases)},
                      {"outer_weights", matrix_to_json(net.outer_weights)},
                      {"outer_scales", vector_to_json(net.outer_scales)},
                      {"outer_biases", vector_to_json(net.outer_biases)}};
        }
      },
      model);
}

Model model_from_json(const json& doc) {
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "linear") {
    return LinearModel{doc.at("weight").get<double>()};
  }
  if (kind == "tnn") {
    TopologicalNetwork net{tests_from_json(doc.at("tests")), head_from_json(doc.at("head"))};
    net.validate();
    return net;
  }
  if (kind == "dnn") {
    MassChannel g0;
    g0.name = doc.at("mass_channel").get<std::string>();
    if (g0.name != "arctan") {
      throw std::runtime_error("checkpoint: unknown mass channel: " + g0.name);
    }
    DistributionalNetwork net{std::move(g0), tests_from_json(doc.at("tests")),
                              head_from_json(doc.at("head"))};
    net.validate();
    return net;
  }
  if (kind == "practical") {
    PracticalNetwork net;
    net.mass_channel.name = doc.at("mass_channel").get<std::string>();
    if (net.mass_channel.name != "arctan") {
      throw std::runtime_error("checkpoint: unknown mass channel: " + net.mass_channel.name);
    }
    net.act = activation_from_name(doc.at("activation").get<std::string>());
    const auto d = doc.at("input_dim").get<Eigen::Index>();
    const auto n1 = doc.at("inner_hidden").get<Eigen::Index>();
    const auto m = doc.at("feature_count").get<Eigen::Index>();
    const auto n2 = doc.at("outer_hidden").get<Eigen::Index>();
    net.inner_weights = matrix_from_json(doc.at("inner_weights"), d, n1);
    net.inner_mix = matrix_from_json(doc.at("inner_mix"), m, n1);
    net.inner_biases = vector_from_json(doc.at("inner_biases"), n1);
    net.outer_weights = matrix_from_json(doc.at("outer_weights"), 1 + m, n2);
    net.outer_scales = vector_from_json(doc.at("outer_scales"), n2);
    net.outer_biases = vector_from_json(doc.at("outer_biases"), n2);
    net.validate();
    return net;
  }
  throw std::runtime_error("checkpoint: unknown model kind: " + kind);
}

void save_checkpoint(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << model_to_json(model).dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::runtime_error("invalid checkpoint " + path + ": " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace tdnn

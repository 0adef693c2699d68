#include "tdnn/nets.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace tdnn {

double activate(Activation act, double u) {
  switch (act) {
    case Activation::tanh_: return std::tanh(u);
    case Activation::logistic: return 1.0 / (1.0 + std::exp(-u));
  }
  throw std::logic_error("activate: bad enum");
}

double activate_deriv(Activation act, double u) {
  switch (act) {
    case Activation::tanh_: {
      const double t = std::tanh(u);
      return 1.0 - t * t;
    }
    case Activation::logistic: {
      const double s = 1.0 / (1.0 + std::exp(-u));
      return s * (1.0 - s);
    }
  }
  throw std::logic_error("activate_deriv: bad enum");
}

Activation activation_from_name(const std::string& name) {
  if (name == "tanh") return Activation::tanh_;
  if (name == "logistic") return Activation::logistic;
  throw std::invalid_argument("unsupported activation: " + name);
}

std::string activation_name(Activation act) {
  return act == Activation::tanh_ ? "tanh" : "logistic";
}

void HornikBlock::validate() const {
  if (input_weights.rows() < 1 || input_weights.cols() < 1) {
    throw std::invalid_argument("HornikBlock: empty weight matrix");
  }
  if (biases.size() != input_weights.cols()) {
    throw std::invalid_argument("HornikBlock: bias width mismatch");
  }
  if (output_weights.cols() != input_weights.cols() || output_weights.rows() < 1) {
    throw std::invalid_argument("HornikBlock: output weight shape mismatch");
  }
}

Eigen::VectorXd HornikBlock::eval(const Eigen::VectorXd& z) const {
  if (z.size() != input_weights.rows()) {
    throw std::invalid_argument("HornikBlock: input width mismatch");
  }
  Eigen::VectorXd pre = input_weights.transpose() * z - biases;
  for (Eigen::Index j = 0; j < pre.size(); ++j) pre(j) = activate(act, pre(j));
  return output_weights * pre;
}

OutputNetwork::OutputNetwork(std::vector<HornikBlock> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("OutputNetwork: no layers");
  for (size_t i = 0; i < layers_.size(); ++i) {
    layers_[i].validate();
    if (i > 0 && layers_[i].input_width() != layers_[i - 1].output_width()) {
      throw std::invalid_argument("OutputNetwork: layer width mismatch");
    }
  }
}

OutputNetwork OutputNetwork::hornik(int input_width, int hidden_width, int output_width,
                                    Activation act, std::uint64_t seed) {
  if (input_width < 1 || hidden_width < 1 || output_width < 1) {
    throw std::invalid_argument("OutputNetwork::hornik: widths must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  HornikBlock block;
  block.act = act;
  block.input_weights.resize(input_width, hidden_width);
  const double in_scale = 1.0 / std::sqrt(static_cast<double>(input_width));
  for (int r = 0; r < input_width; ++r) {
    for (int c = 0; c < hidden_width; ++c) block.input_weights(r, c) = unit(rng) * in_scale;
  }
  block.biases = Eigen::VectorXd::Zero(hidden_width);
  block.output_weights.resize(output_width, hidden_width);
  const double out_scale = 1.0 / std::sqrt(static_cast<double>(hidden_width));
  for (int r = 0; r < output_width; ++r) {
    for (int c = 0; c < hidden_width; ++c) block.output_weights(r, c) = unit(rng) * out_scale;
  }
  return OutputNetwork({block});
}

int OutputNetwork::input_width() const {
  if (layers_.empty()) throw std::logic_error("OutputNetwork: empty");
  return layers_.front().input_width();
}

int OutputNetwork::output_width() const {
  if (layers_.empty()) throw std::logic_error("OutputNetwork: empty");
  return layers_.back().output_width();
}

Eigen::VectorXd OutputNetwork::eval(const Eigen::VectorXd& z) const {
  if (layers_.empty()) throw std::logic_error("OutputNetwork: empty");
  Eigen::VectorXd v = z;
  for (const HornikBlock& layer : layers_) v = layer.eval(v);
  return v;
}

Eigen::VectorXd hornik_eval(const OutputNetwork& net, const Eigen::VectorXd& z) {
  return net.eval(z);
}

GenericHead scalar_head(int in_width, std::function<double(const Eigen::VectorXd&)> fn) {
  GenericHead h;
  h.in_width = in_width;
  h.out_width = 1;
  h.fn = [f = std::move(fn)](const Eigen::VectorXd& z) {
    return Eigen::VectorXd::Constant(1, f(z));
  };
  return h;
}

int head_input_width(const Head& head) {
  if (const auto* net = std::get_if<OutputNetwork>(&head)) return net->input_width();
  return std::get<GenericHead>(head).in_width;
}

int head_output_width(const Head& head) {
  if (const auto* net = std::get_if<OutputNetwork>(&head)) return net->output_width();
  return std::get<GenericHead>(head).out_width;
}

Eigen::VectorXd head_eval(const Head& head, const Eigen::VectorXd& z) {
  if (const auto* net = std::get_if<OutputNetwork>(&head)) return net->eval(z);
  const auto& gh = std::get<GenericHead>(head);
  if (!gh.fn) throw std::logic_error("GenericHead: empty function");
  if (z.size() != gh.in_width) throw std::invalid_argument("GenericHead: input width mismatch");
  return gh.fn(z);
}

namespace {

double scalar_output(const Head& head, const Eigen::VectorXd& z, const char* what) {
  if (head_output_width(head) != 1) {
    throw std::invalid_argument(std::string(what) + ": head output width must be 1");
  }
  return head_eval(head, z)(0);
}

}  // namespace

void TopologicalNetwork::validate() const {
  if (tests.empty()) throw std::invalid_argument("TopologicalNetwork: no test functions");
  const int d = tests.front().dim();
  for (const TestFunction& g : tests) {
    if (g.dim() != d) throw std::invalid_argument("TopologicalNetwork: mixed test dimensions");
  }
  if (head_input_width(head) != static_cast<int>(tests.size())) {
    throw std::invalid_argument("TopologicalNetwork: head input width must equal test count");
  }
}

Eigen::VectorXd TopologicalNetwork::features(const Point& p) const {
  Eigen::VectorXd z(static_cast<Eigen::Index>(tests.size()));
  for (size_t i = 0; i < tests.size(); ++i) {
    z(static_cast<Eigen::Index>(i)) = tests[i].eval(p);
  }
  return z;
}

double tnn_forward(const TopologicalNetwork& net, const Point& p) {
  net.validate();
  return scalar_output(net.head, net.features(p), "tnn_forward");
}

void DistributionalNetwork::validate() const {
  const int d = tests.empty() ? 0 : tests.front().dim();
  for (const TestFunction& g : tests) {
    if (g.dim() != d) throw std::invalid_argument("DistributionalNetwork: mixed test dimensions");
  }
  if (head_input_width(head) != 1 + static_cast<int>(tests.size())) {
    throw std::invalid_argument(
        "DistributionalNetwork: head input width must be 1 + test count");
  }
}

Eigen::VectorXd DistributionalNetwork::features(const ParticleMeasure& mu) const {
  Eigen::VectorXd z(1 + static_cast<Eigen::Index>(tests.size()));
  z(0) = mass_channel(mu.total_mass());
  for (size_t i = 0; i < tests.size(); ++i) {
    z(1 + static_cast<Eigen::Index>(i)) = integrate(tests[i], mu, true);
  }
  return z;
}

double dnn_forward(const DistributionalNetwork& net, const ParticleMeasure& mu) {
  net.validate();
  return scalar_output(net.head, net.features(mu), "dnn_forward");
}

void PracticalNetwork::validate() const {
  const auto n1 = inner_weights.cols();
  if (inner_weights.rows() < 1 || n1 < 1) {
    throw std::invalid_argument("PracticalNetwork: empty inner weights");
  }
  if (inner_mix.cols() != n1 || inner_mix.rows() < 1) {
    throw std::invalid_argument("PracticalNetwork: inner mix shape mismatch");
  }
  if (inner_biases.size() != n1) {
    throw std::invalid_argument("PracticalNetwork: inner bias width mismatch");
  }
  if (outer_weights.rows() != 1 + inner_mix.rows() || outer_weights.cols() < 1) {
    throw std::invalid_argument("PracticalNetwork: outer weight shape mismatch");
  }
  if (outer_scales.size() != outer_weights.cols() || outer_biases.size() != outer_weights.cols()) {
    throw std::invalid_argument("PracticalNetwork: outer parameter width mismatch");
  }
}

Eigen::VectorXd PracticalNetwork::psi(const ParticleMeasure& mu) const {
  if (mu.dim() != input_dim()) {
    throw std::invalid_argument("PracticalNetwork: measure dimension mismatch");
  }
  const Eigen::Index m = inner_mix.rows();
  Eigen::VectorXd out(1 + m);
  out(0) = mass_channel(mu.total_mass());
  // ∫ B σ(A'x − Θ) dμ/μ(E): compensated per output coordinate
  std::vector<CompensatedSum> acc(static_cast<size_t>(m));
  for (const Atom& a : mu.atoms()) {
    Eigen::VectorXd pre = inner_weights.transpose() * a.location - inner_biases;
    for (Eigen::Index j = 0; j < pre.size(); ++j) pre(j) = activate(act, pre(j));
    const Eigen::VectorXd mixed = inner_mix * pre;
    for (Eigen::Index r = 0; r < m; ++r) acc[static_cast<size_t>(r)].add(a.weight * mixed(r));
  }
  const double mass = mu.total_mass();
  for (Eigen::Index r = 0; r < m; ++r) out(1 + r) = acc[static_cast<size_t>(r)].value() / mass;
  return out;
}

double practical_forward(const PracticalNetwork& net, const ParticleMeasure& mu) {
  net.validate();
  const Eigen::VectorXd features = net.psi(mu);
  CompensatedSum acc;
  for (Eigen::Index j = 0; j < net.outer_scales.size(); ++j) {
    acc.add(net.outer_scales(j) *
            activate(net.act, net.outer_weights.col(j).dot(features) - net.outer_biases(j)));
  }
  return acc.value();
}

PracticalNetwork random_practical(int dim, int inner_hidden, int feature_count,
                                  int outer_hidden, Activation act, std::uint64_t seed) {
  if (dim < 1 || inner_hidden < 1 || feature_count < 1 || outer_hidden < 1) {
    throw std::invalid_argument("random_practical: widths must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto fill = [&](Eigen::MatrixXd& mat, int rows, int cols, double scale) {
    mat.resize(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) mat(r, c) = unit(rng) * scale;
    }
  };
  PracticalNetwork net;
  net.act = act;
  fill(net.inner_weights, dim, inner_hidden, 1.0 / std::sqrt(static_cast<double>(dim)));
  fill(net.inner_mix, feature_count, inner_hidden,
       1.0 / std::sqrt(static_cast<double>(inner_hidden)));
  net.inner_biases = Eigen::VectorXd::Zero(inner_hidden);
  fill(net.outer_weights, 1 + feature_count, outer_hidden,
       1.0 / std::sqrt(static_cast<double>(1 + feature_count)));
  Eigen::MatrixXd q;
  fill(q, 1, outer_hidden, 1.0 / std::sqrt(static_cast<double>(outer_hidden)));
  net.outer_scales = q.row(0);
  net.outer_biases = Eigen::VectorXd::Zero(outer_hidden);
  return net;
}

double deep_set_eval(const std::vector<TestFunction>& g, const Head& f,
                     const std::vector<Point>& points) {
  if (points.empty()) throw std::invalid_argument("deep_set_eval: no points");
  if (g.empty()) throw std::invalid_argument("deep_set_eval: no test functions");
  if (head_input_width(f) != static_cast<int>(g.size())) {
    throw std::invalid_argument("deep_set_eval: head input width must equal g size");
  }
  std::vector<CompensatedSum> acc(g.size());
  for (const Point& p : points) {
    for (size_t k = 0; k < g.size(); ++k) acc[k].add(g[k].eval(p));
  }
  Eigen::VectorXd s(static_cast<Eigen::Index>(g.size()));
  for (size_t k = 0; k < g.size(); ++k) s(static_cast<Eigen::Index>(k)) = acc[k].value();
  return scalar_output(f, s, "deep_set_eval");
}

}  // namespace tdnn

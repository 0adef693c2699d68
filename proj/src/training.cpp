#include "tdnn/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace tdnn {

double LossSpec::value(double yhat, double y) const {
  switch (kind) {
    case LossKind::squared: {
      const double e = yhat - y;
      return e * e;
    }
    case LossKind::logistic: {
      // cross-entropy of sigmoid(yhat) against y ∈ {0,1}, evaluated stably
      const double softplus =
          yhat > 0.0 ? yhat + std::log1p(std::exp(-yhat)) : std::log1p(std::exp(yhat));
      return softplus - y * yhat;
    }
  }
  throw std::logic_error("LossSpec::value: bad enum");
}

double LossSpec::deriv(double yhat, double y) const {
  switch (kind) {
    case LossKind::squared:
      return 2.0 * (yhat - y);
    case LossKind::logistic:
      return 1.0 / (1.0 + std::exp(-yhat)) - y;
  }
  throw std::logic_error("LossSpec::deriv: bad enum");
}

LossKind loss_kind_from_name(const std::string& name) {
  if (name == "squared") return LossKind::squared;
  if (name == "logistic") return LossKind::logistic;
  throw std::invalid_argument("unsupported loss: " + name);
}

std::string loss_kind_name(LossKind kind) {
  return kind == LossKind::squared ? "squared" : "logistic";
}

namespace {

double linear_feature(const ParticleMeasure& mu) {
  return integrate_fn([](const Point& p) { return p(0); }, mu, true);
}

const Point& single_point(const Record& record) {
  if (record.measure.size() != 1) {
    throw std::invalid_argument("topological model expects single-atom records");
  }
  return record.measure.atoms().front().location;
}

const OutputNetwork& trainable_head(const Head& head) {
  const auto* net = std::get_if<OutputNetwork>(&head);
  if (net == nullptr) {
    throw std::invalid_argument("training requires an output-network head");
  }
  return *net;
}

void append_matrix_rowmajor(const Eigen::MatrixXd& m, Eigen::VectorXd& out, int& offset) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out(offset++) = m(r, c);
  }
}

void read_matrix_rowmajor(Eigen::MatrixXd& m, const Eigen::VectorXd& in, int& offset) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = in(offset++);
  }
}

// Parameter block order per head layer: input_weights, biases, output_weights.
void head_layout(const OutputNetwork& net, ParamLayout& layout) {
  for (size_t l = 0; l < net.layers().size(); ++l) {
    const HornikBlock& b = net.layers()[l];
    const std::string p = "head.L" + std::to_string(l) + ".";
    layout.blocks.push_back({p + "input_weights", layout.total,
                             static_cast<int>(b.input_weights.size())});
    layout.total += static_cast<int>(b.input_weights.size());
    layout.blocks.push_back({p + "biases", layout.total, static_cast<int>(b.biases.size())});
    layout.total += static_cast<int>(b.biases.size());
    layout.blocks.push_back({p + "output_weights", layout.total,
                             static_cast<int>(b.output_weights.size())});
    layout.total += static_cast<int>(b.output_weights.size());
  }
}

void tests_layout(const std::vector<TestFunction>& tests, ParamLayout& layout) {
  for (size_t i = 0; i < tests.size(); ++i) {
    const int pc = tests[i].param_count();
    if (pc == 0) continue;
    layout.blocks.push_back({"tests." + std::to_string(i), layout.total, pc});
    layout.total += pc;
  }
}

struct HeadTape {
  std::vector<Eigen::VectorXd> inputs;
  std::vector<Eigen::VectorXd> pre;
  std::vector<Eigen::VectorXd> hidden;
  Eigen::VectorXd out;
};

Eigen::VectorXd head_forward_tape(const OutputNetwork& net, const Eigen::VectorXd& z,
                                  HeadTape& tape) {
  Eigen::VectorXd v = z;
  for (const HornikBlock& layer : net.layers()) {
    tape.inputs.push_back(v);
    Eigen::VectorXd pre = layer.input_weights.transpose() * v - layer.biases;
    Eigen::VectorXd hidden(pre.size());
    for (Eigen::Index j = 0; j < pre.size(); ++j) hidden(j) = activate(layer.act, pre(j));
    tape.pre.push_back(pre);
    tape.hidden.push_back(std::move(hidden));
    v = layer.output_weights * tape.hidden.back();
  }
  tape.out = v;
  return v;
}

// Fills the head's parameter gradients (layout order, starting at `offset`)
// and returns dL/dinput.
Eigen::VectorXd head_backward(const OutputNetwork& net, const HeadTape& tape,
                              const Eigen::VectorXd& dout, Eigen::VectorXd& grad,
                              int offset) {
  // per-layer segment offsets, walked forward then consumed backward
  std::vector<int> starts(net.layers().size());
  int cursor = offset;
  for (size_t l = 0; l < net.layers().size(); ++l) {
    starts[l] = cursor;
    const HornikBlock& b = net.layers()[l];
    cursor += static_cast<int>(b.input_weights.size() + b.biases.size() +
                               b.output_weights.size());
  }
  Eigen::VectorXd delta = dout;
  for (size_t li = net.layers().size(); li-- > 0;) {
    const HornikBlock& b = net.layers()[li];
    const Eigen::VectorXd& input = tape.inputs[li];
    const Eigen::VectorXd& pre = tape.pre[li];
    const Eigen::VectorXd& hidden = tape.hidden[li];

    Eigen::VectorXd dpre = b.output_weights.transpose() * delta;
    for (Eigen::Index j = 0; j < dpre.size(); ++j) dpre(j) *= activate_deriv(b.act, pre(j));

    int off = starts[li];
    const Eigen::MatrixXd dA = input * dpre.transpose();          // k×n
    append_matrix_rowmajor(dA, grad, off);
    for (Eigen::Index j = 0; j < dpre.size(); ++j) grad(off++) = -dpre(j);  // dθ
    const Eigen::MatrixXd dB = delta * hidden.transpose();        // m×n
    append_matrix_rowmajor(dB, grad, off);

    delta = b.input_weights * dpre;
  }
  return delta;
}

// ∂/∂params of ∫ g dμ/μ(E) for one trainable test function.
Eigen::VectorXd normalized_integral_param_grad(const TestFunction& g,
                                               const ParticleMeasure& mu) {
  const int pc = g.param_count();
  std::vector<CompensatedSum> acc(static_cast<size_t>(pc));
  for (const Atom& a : mu.atoms()) {
    const Eigen::VectorXd pg = g.param_grad(a.location);
    for (int i = 0; i < pc; ++i) acc[static_cast<size_t>(i)].add(a.weight * pg(i));
  }
  const double mass = mu.total_mass();
  Eigen::VectorXd out(pc);
  for (int i = 0; i < pc; ++i) out(i) = acc[static_cast<size_t>(i)].value() / mass;
  return out;
}

void record_gradient(const Model& model, const Record& record, const LossSpec& loss,
                     Eigen::VectorXd& grad) {
  grad.setZero();
  std::visit(
      [&](const auto& net) {
        using T = std::decay_t<decltype(net)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          const double feat = linear_feature(record.measure);
          const double dl = loss.deriv(net.weight * feat, record.label);
          grad(0) = dl * feat;
        } else if constexpr (std::is_same_v<T, TopologicalNetwork>) {
          net.validate();
          const OutputNetwork& head = trainable_head(net.head);
          const Point& p = single_point(record);
          const Eigen::VectorXd z = net.features(p);
          HeadTape tape;
          const Eigen::VectorXd out = head_forward_tape(head, z, tape);
          const double dl = loss.deriv(out(0), record.label);
          const Eigen::VectorXd dz =
              head_backward(head, tape, Eigen::VectorXd::Constant(1, dl), grad, 0);
          int offset = 0;
          for (const HornikBlock& b : head.layers()) {
            offset += static_cast<int>(b.input_weights.size() + b.biases.size() +
                                       b.output_weights.size());
          }
          for (size_t i = 0; i < net.tests.size(); ++i) {
            const int pc = net.tests[i].param_count();
            if (pc == 0) continue;
            grad.segment(offset, pc) =
                dz(static_cast<Eigen::Index>(i)) * net.tests[i].param_grad(p);
            offset += pc;
          }
        } else if constexpr (std::is_same_v<T, DistributionalNetwork>) {
          net.validate();
          const OutputNetwork& head = trainable_head(net.head);
          const Eigen::VectorXd z = net.features(record.measure);
          HeadTape tape;
          const Eigen::VectorXd out = head_forward_tape(head, z, tape);
          const double dl = loss.deriv(out(0), record.label);
          const Eigen::VectorXd dz =
              head_backward(head, tape, Eigen::VectorXd::Constant(1, dl), grad, 0);
          int offset = 0;
          for (const HornikBlock& b : head.layers()) {
            offset += static_cast<int>(b.input_weights.size() + b.biases.size() +
                                       b.output_weights.size());
          }
          for (size_t i = 0; i < net.tests.size(); ++i) {
            const int pc = net.tests[i].param_count();
            if (pc == 0) continue;
            grad.segment(offset, pc) =
                dz(1 + static_cast<Eigen::Index>(i)) *
                normalized_integral_param_grad(net.tests[i], record.measure);
            offset += pc;
          }
        } else {  // PracticalNetwork
          net.validate();
          const ParticleMeasure& mu = record.measure;
          if (mu.dim() != net.input_dim()) {
            throw std::invalid_argument("practical model: measure dimension mismatch");
          }
          const double mass = mu.total_mass();
          const Eigen::Index n1 = net.inner_weights.cols();
          const Eigen::Index m = net.inner_mix.rows();
          const Eigen::Index n2 = net.outer_weights.cols();

          // pass 1: weighted average of hidden activations
          std::vector<CompensatedSum> hbar_acc(static_cast<size_t>(n1));
          for (const Atom& a : mu.atoms()) {
            Eigen::VectorXd pre = net.inner_weights.transpose() * a.location - net.inner_biases;
            for (Eigen::Index j = 0; j < n1; ++j) {
              hbar_acc[static_cast<size_t>(j)].add(a.weight * activate(net.act, pre(j)));
            }
          }
          Eigen::VectorXd hbar(n1);
          for (Eigen::Index j = 0; j < n1; ++j) {
            hbar(j) = hbar_acc[static_cast<size_t>(j)].value() / mass;
          }

          Eigen::VectorXd psi(1 + m);
          psi(0) = net.mass_channel(mass);
          psi.tail(m) = net.inner_mix * hbar;

          // outer forward + backward
          Eigen::VectorXd u(n2), s(n2), sprime(n2);
          CompensatedSum out_acc;
          for (Eigen::Index j = 0; j < n2; ++j) {
            u(j) = net.outer_weights.col(j).dot(psi) - net.outer_biases(j);
            s(j) = activate(net.act, u(j));
            sprime(j) = activate_deriv(net.act, u(j));
            out_acc.add(net.outer_scales(j) * s(j));
          }
          const double dl = loss.deriv(out_acc.value(), record.label);

          Eigen::VectorXd dpsi = Eigen::VectorXd::Zero(1 + m);
          Eigen::MatrixXd douter(1 + m, n2);
          Eigen::VectorXd dq(n2), dphi(n2);
          for (Eigen::Index j = 0; j < n2; ++j) {
            const double gate = dl * net.outer_scales(j) * sprime(j);
            dq(j) = dl * s(j);
            dphi(j) = -gate;
            douter.col(j) = gate * psi;
            dpsi += gate * net.outer_weights.col(j);
          }
          const Eigen::VectorXd dpsif = dpsi.tail(m);
          const Eigen::MatrixXd dmix = dpsif * hbar.transpose();  // m×n1
          const Eigen::VectorXd shid = net.inner_mix.transpose() * dpsif;  // n1

          // pass 2: distribute shid through the averaged activations
          Eigen::MatrixXd dinner = Eigen::MatrixXd::Zero(net.inner_weights.rows(), n1);
          Eigen::VectorXd dtheta = Eigen::VectorXd::Zero(n1);
          for (const Atom& a : mu.atoms()) {
            Eigen::VectorXd pre = net.inner_weights.transpose() * a.location - net.inner_biases;
            for (Eigen::Index j = 0; j < n1; ++j) {
              const double w = shid(j) * (a.weight / mass) * activate_deriv(net.act, pre(j));
              dtheta(j) -= w;
              dinner.col(j) += w * a.location;
            }
          }

          int offset = 0;
          append_matrix_rowmajor(dinner, grad, offset);
          append_matrix_rowmajor(dmix, grad, offset);
          grad.segment(offset, n1) = dtheta;
          offset += static_cast<int>(n1);
          append_matrix_rowmajor(douter, grad, offset);
          grad.segment(offset, n2) = dq;
          offset += static_cast<int>(n2);
          grad.segment(offset, n2) = dphi;
        }
      },
      model);
}

}  // namespace

double model_predict(const Model& model, const Record& record) {
  return std::visit(
      [&](const auto& net) -> double {
        using T = std::decay_t<decltype(net)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          return net.weight * linear_feature(record.measure);
        } else if constexpr (std::is_same_v<T, TopologicalNetwork>) {
          return tnn_forward(net, single_point(record));
        } else if constexpr (std::is_same_v<T, DistributionalNetwork>) {
          return dnn_forward(net, record.measure);
        } else {
          return practical_forward(net, record.measure);
        }
      },
      model);
}

std::string ParamLayout::locate(int index) const {
  for (const Block& b : blocks) {
    if (index >= b.offset && index < b.offset + b.size) {
      return b.name + "[" + std::to_string(index - b.offset) + "]";
    }
  }
  return "param[" + std::to_string(index) + "]";
}

ParamLayout param_layout(const Model& model) {
  ParamLayout layout;
  std::visit(
      [&](const auto& net) {
        using T = std::decay_t<decltype(net)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          layout.blocks.push_back({"weight", 0, 1});
          layout.total = 1;
        } else if constexpr (std::is_same_v<T, TopologicalNetwork> ||
                             std::is_same_v<T, DistributionalNetwork>) {
          head_layout(trainable_head(net.head), layout);
          tests_layout(net.tests, layout);
        } else {
          const auto add = [&](const std::string& name, int size) {
            layout.blocks.push_back({name, layout.total, size});
            layout.total += size;
          };
          add("inner_weights", static_cast<int>(net.inner_weights.size()));
          add("inner_mix", static_cast<int>(net.inner_mix.size()));
          add("inner_biases", static_cast<int>(net.inner_biases.size()));
          add("outer_weights", static_cast<int>(net.outer_weights.size()));
          add("outer_scales", static_cast<int>(net.outer_scales.size()));
          add("outer_biases", static_cast<int>(net.outer_biases.size()));
        }
      },
      model);
  return layout;
}

Eigen::VectorXd flatten_params(const Model& model) {
  const ParamLayout layout = param_layout(model);
  Eigen::VectorXd theta(layout.total);
  int offset = 0;
  std::visit(
      [&](const auto& net) {
        using T = std::decay_t<decltype(net)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          theta(offset++) = net.weight;
        } else if constexpr (std::is_same_v<T, TopologicalNetwork> ||
                             std::is_same_v<T, DistributionalNetwork>) {
          for (const HornikBlock& b : trainable_head(net.head).layers()) {
            append_matrix_rowmajor(b.input_weights, theta, offset);
            theta.segment(offset, b.biases.size()) = b.biases;
            offset += static_cast<int>(b.biases.size());
            append_matrix_rowmajor(b.output_weights, theta, offset);
          }
          for (const TestFunction& g : net.tests) {
            const int pc = g.param_count();
            if (pc == 0) continue;
            theta.segment(offset, pc) = g.params();
            offset += pc;
          }
        } else {
          append_matrix_rowmajor(net.inner_weights, theta, offset);
          append_matrix_rowmajor(net.inner_mix, theta, offset);
          theta.segment(offset, net.inner_biases.size()) = net.inner_biases;
          offset += static_cast<int>(net.inner_biases.size());
          append_matrix_rowmajor(net.outer_weights, theta, offset);
          theta.segment(offset, net.outer_scales.size()) = net.outer_scales;
          offset += static_cast<int>(net.outer_scales.size());
          theta.segment(offset, net.outer_biases.size()) = net.outer_biases;
          offset += static_cast<int>(net.outer_biases.size());
        }
      },
      model);
  return theta;
}

void unflatten_params(Model& model, const Eigen::VectorXd& theta) {
  const ParamLayout layout = param_layout(model);
  if (theta.size() != layout.total) {
    throw std::invalid_argument("unflatten_params: wrong parameter count");
  }
  int offset = 0;
  std::visit(
      [&](auto& net) {
        using T = std::decay_t<decltype(net)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          net.weight = theta(offset++);
        } else if constexpr (std::is_same_v<T, TopologicalNetwork> ||
                             std::is_same_v<T, DistributionalNetwork>) {
          auto* head = std::get_if<OutputNetwork>(&net.head);
          for (HornikBlock& b : head->layers()) {
            read_matrix_rowmajor(b.input_weights, theta, offset);
            b.biases = theta.segment(offset, b.biases.size());
            offset += static_cast<int>(b.biases.size());
            read_matrix_rowmajor(b.output_weights, theta, offset);
          }
          for (TestFunction& g : net.tests) {
            const int pc = g.param_count();
            if (pc == 0) continue;
            g.set_params(theta.segment(offset, pc));
            offset += pc;
          }
        } else {
          read_matrix_rowmajor(net.inner_weights, theta, offset);
          read_matrix_rowmajor(net.inner_mix, theta, offset);
          net.inner_biases = theta.segment(offset, net.inner_biases.size());
          offset += static_cast<int>(net.inner_biases.size());
          read_matrix_rowmajor(net.outer_weights, theta, offset);
          net.outer_scales = theta.segment(offset, net.outer_scales.size());
          offset += static_cast<int>(net.outer_scales.size());
          net.outer_biases = theta.segment(offset, net.outer_biases.size());
          offset += static_cast<int>(net.outer_biases.size());
        }
      },
      model);
}

double empirical_risk(const Model& model, const Dataset& data, const LossSpec& loss) {
  if (data.empty()) throw std::invalid_argument("empirical_risk: empty dataset");
  CompensatedSum acc;
  for (size_t i = 0; i < data.size(); ++i) {
    try {
      acc.add(loss.value(model_predict(model, data[i]), data[i].label));
    } catch (const std::exception& e) {
      throw std::runtime_error("empirical_risk: record " + std::to_string(i) + ": " + e.what());
    }
  }
  return acc.value() / static_cast<double>(data.size());
}

Eigen::VectorXd gradient(const Model& model, const Dataset& batch, const LossSpec& loss) {
  if (batch.empty()) throw std::invalid_argument("gradient: empty batch");
  const ParamLayout layout = param_layout(model);
  std::vector<CompensatedSum> acc(static_cast<size_t>(layout.total));
  Eigen::VectorXd grec(layout.total);
  for (size_t i = 0; i < batch.size(); ++i) {
    try {
      record_gradient(model, batch[i], loss, grec);
    } catch (const std::exception& e) {
      throw std::runtime_error("gradient: record " + std::to_string(i) + ": " + e.what());
    }
    for (int j = 0; j < layout.total; ++j) acc[static_cast<size_t>(j)].add(grec(j));
  }
  Eigen::VectorXd g(layout.total);
  for (int j = 0; j < layout.total; ++j) {
    g(j) = acc[static_cast<size_t>(j)].value() / static_cast<double>(batch.size());
  }
  return g;
}

Eigen::VectorXd fd_gradient(const Model& model, const Dataset& batch, const LossSpec& loss,
                            double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_gradient: step must be > 0");
  Eigen::VectorXd theta = flatten_params(model);
  Eigen::VectorXd g(theta.size());
  Model scratch = model;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double saved = theta(i);
    theta(i) = saved + h;
    unflatten_params(scratch, theta);
    const double up = empirical_risk(scratch, batch, loss);
    theta(i) = saved - h;
    unflatten_params(scratch, theta);
    const double down = empirical_risk(scratch, batch, loss);
    theta(i) = saved;
    g(i) = (up - down) / (2.0 * h);
  }
  unflatten_params(scratch, theta);
  return g;
}

void TrainConfig::validate() const {
  if (!(step > 0.0)) throw std::invalid_argument("TrainConfig: step must be > 0");
  if (iterations < 0) throw std::invalid_argument("TrainConfig: iterations must be >= 0");
  if (momentum_coef < 0.0 || momentum_coef >= 1.0) {
    throw std::invalid_argument("TrainConfig: momentum must be in [0,1)");
  }
  if (mode == GradientMode::finite_difference && (fd_step < 1e-8 || fd_step > 1e-3)) {
    throw std::invalid_argument("TrainConfig: fd step must be in [1e-8, 1e-3]");
  }
}

FitResult fit(Model model, const Dataset& data, const LossSpec& loss,
              const TrainConfig& config) {
  config.validate();
  if (data.empty()) throw std::invalid_argument("fit: empty dataset");
  const ParamLayout layout = param_layout(model);
  Eigen::VectorXd theta = flatten_params(model);
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(layout.total);

  const bool minibatch = config.batch > 0 && config.batch < static_cast<int>(data.size());
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t{0});
  if (minibatch) {
    std::mt19937_64 rng(config.seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  size_t cursor = 0;

  std::vector<double> trace;
  trace.reserve(static_cast<size_t>(config.iterations) + 1);
  for (int it = 0;; ++it) {
    const double risk = empirical_risk(model, data, loss);
    trace.push_back(risk);
    if (!std::isfinite(risk) || risk > 1e12) {
      throw TrainingDiverged("fit: risk diverged at iteration " + std::to_string(it), trace);
    }
    if (it == config.iterations) break;

    Eigen::VectorXd g;
    if (minibatch) {
      Dataset batch;
      batch.reserve(static_cast<size_t>(config.batch));
      for (int b = 0; b < config.batch; ++b) {
        batch.push_back(data[order[cursor]]);
        cursor = (cursor + 1) % data.size();
      }
      g = config.mode == GradientMode::analytic ? gradient(model, batch, loss)
                                                : fd_gradient(model, batch, loss, config.fd_step);
    } else {
      g = config.mode == GradientMode::analytic ? gradient(model, data, loss)
                                                : fd_gradient(model, data, loss, config.fd_step);
    }
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g(i))) {
        throw std::runtime_error("fit: non-finite gradient component at " +
                                 layout.locate(static_cast<int>(i)));
      }
    }
    if (config.optimizer == Optimizer::momentum) {
      velocity = config.momentum_coef * velocity - config.step * g;
      theta += velocity;
    } else {
      theta -= config.step * g;
    }
    unflatten_params(model, theta);
  }
  return {std::move(model), std::move(trace)};
}

PowerSelection select_powers(const Dataset& data,
                             const std::vector<std::vector<std::vector<int>>>& candidates,
                             const LossSpec& loss, const TrainConfig& config,
                             int head_hidden_width) {
  if (candidates.empty()) throw std::invalid_argument("select_powers: no candidates");
  if (data.size() < 2) throw std::invalid_argument("select_powers: need at least two records");
  const size_t arity = candidates.front().size();
  for (const auto& c : candidates) {
    if (c.size() != arity || arity == 0) {
      throw std::invalid_argument("select_powers: candidates must share a nonzero arity");
    }
  }

  Dataset train, heldout;
  for (size_t i = 0; i < data.size(); ++i) {
    (i % 5 == 4 ? heldout : train).push_back(data[i]);
  }
  if (heldout.empty()) {
    heldout.push_back(train.back());
    train.pop_back();
  }

  bool have_best = false;
  PowerSelection best;
  for (const auto& candidate : candidates) {
    std::vector<TestFunction> tests;
    tests.reserve(arity);
    for (const auto& powers : candidate) tests.push_back(TestFunction::monomial(powers));
    DistributionalNetwork net{
        MassChannel{}, std::move(tests),
        OutputNetwork::hornik(1 + static_cast<int>(arity), head_hidden_width, 1,
                              Activation::tanh_, config.seed)};
    FitResult result = fit(Model{std::move(net)}, train, loss, config);
    const double risk = empirical_risk(result.model, heldout, loss);
    const bool better =
        !have_best || risk < best.heldout_risk ||
        (risk == best.heldout_risk && candidate < best.powers);
    if (better) {
      best = {candidate, std::move(result.model), risk};
      have_best = true;
    }
  }
  return best;
}

}  // namespace tdnn

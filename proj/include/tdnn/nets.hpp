#pragma once

#include "tdnn/measure.hpp"
#include "tdnn/testfn.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace tdnn {

enum class Activation { tanh_, logistic };

double activate(Activation act, double u);
double activate_deriv(Activation act, double u);
Activation activation_from_name(const std::string& name);
std::string activation_name(Activation act);

// One Hornik block z ↦ β σ(A'z − θ): input width k, hidden width n, output
// width m. σ must stay bounded and non-constant; tanh is the default.
struct HornikBlock {
  Eigen::MatrixXd input_weights;   // k×n, column j = a_j
  Eigen::VectorXd biases;          // n, entries θ_j
  Eigen::MatrixXd output_weights;  // m×n, β
  Activation act = Activation::tanh_;

  int input_width() const { return static_cast<int>(input_weights.rows()); }
  int hidden_width() const { return static_cast<int>(input_weights.cols()); }
  int output_width() const { return static_cast<int>(output_weights.rows()); }
  void validate() const;
  Eigen::VectorXd eval(const Eigen::VectorXd& z) const;
};

// A stack of Hornik blocks; the canonical configuration is a single block.
class OutputNetwork {
 public:
  OutputNetwork() = default;
  explicit OutputNetwork(std::vector<HornikBlock> layers);

  // Single random block. Affine weights ~ U(-1,1)/sqrt(fan-in), biases zero.
  static OutputNetwork hornik(int input_width, int hidden_width, int output_width,
                              Activation act, std::uint64_t seed);

  const std::vector<HornikBlock>& layers() const { return layers_; }
  std::vector<HornikBlock>& layers() { return layers_; }
  int input_width() const;
  int output_width() const;
  Eigen::VectorXd eval(const Eigen::VectorXd& z) const;

 private:
  std::vector<HornikBlock> layers_;
};

Eigen::VectorXd hornik_eval(const OutputNetwork& net, const Eigen::VectorXd& z);

// Heads are continuous maps ℝ^k → ℝ^m. The trainable, serializable choice is
// an OutputNetwork; GenericHead admits arbitrary continuous functions (the
// output family is not restricted to Hornik blocks).
struct GenericHead {
  int in_width = 0;
  int out_width = 1;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn;
};

GenericHead scalar_head(int in_width, std::function<double(const Eigen::VectorXd&)> fn);

using Head = std::variant<OutputNetwork, GenericHead>;

int head_input_width(const Head& head);
int head_output_width(const Head& head);
Eigen::VectorXd head_eval(const Head& head, const Eigen::VectorXd& z);

// p ↦ f(g_1(p), ..., g_n(p)).
struct TopologicalNetwork {
  std::vector<TestFunction> tests;
  Head head;

  Eigen::VectorXd features(const Point& p) const;
  void validate() const;
};

double tnn_forward(const TopologicalNetwork& net, const Point& p);

// μ ↦ f(g0(μ(E)), ∫g_2 dμ/μ(E), ..., ∫g_n dμ/μ(E)). The head reads the mass
// channel as input coordinate 1 followed by the normalized integrals.
struct DistributionalNetwork {
  MassChannel mass_channel;
  std::vector<TestFunction> tests;
  Head head;

  Eigen::VectorXd features(const ParticleMeasure& mu) const;
  void validate() const;
};

double dnn_forward(const DistributionalNetwork& net, const ParticleMeasure& mu);

// The composed form: ψ(μ) = (arctan(μ(E)), ∫ B σ(A'x − Θ) dμ/μ(E)) followed
// by an outer Hornik sum Σ_j q_j σ(p_j'ψ(μ) − φ_j).
struct PracticalNetwork {
  MassChannel mass_channel;
  Eigen::MatrixXd inner_weights;   // A: D×n1
  Eigen::MatrixXd inner_mix;       // B: m×n1
  Eigen::VectorXd inner_biases;    // Θ: n1
  Eigen::MatrixXd outer_weights;   // (1+m)×n2, column j = p_j
  Eigen::VectorXd outer_scales;    // q: n2
  Eigen::VectorXd outer_biases;    // φ: n2
  Activation act = Activation::tanh_;

  int input_dim() const { return static_cast<int>(inner_weights.rows()); }
  int feature_width() const { return 1 + static_cast<int>(inner_mix.rows()); }
  void validate() const;
  Eigen::VectorXd psi(const ParticleMeasure& mu) const;
};

double practical_forward(const PracticalNetwork& net, const ParticleMeasure& mu);

PracticalNetwork random_practical(int dim, int inner_hidden, int feature_count,
                                  int outer_hidden, Activation act, std::uint64_t seed);

// Deep set f(Σ_i g(x_i)) with g given coordinate-wise by test functions.
// Agrees with the measure form f(μ(E)·∫g dμ/μ(E)) on unit-weight atoms.
double deep_set_eval(const std::vector<TestFunction>& g, const Head& f,
                     const std::vector<Point>& points);

}  // namespace tdnn

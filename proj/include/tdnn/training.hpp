#pragma once

#include "tdnn/measure.hpp"
#include "tdnn/nets.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace tdnn {

enum class LossKind { squared, logistic };

// r(ŷ, y) ≥ 0. Squared error (ŷ−y)²; logistic is the cross-entropy of a
// sigmoid score against labels in {0,1}.
struct LossSpec {
  LossKind kind = LossKind::squared;

  double value(double yhat, double y) const;
  double deriv(double yhat, double y) const;  // ∂r/∂ŷ
};

LossKind loss_kind_from_name(const std::string& name);
std::string loss_kind_name(LossKind kind);

// One record: an input measure and its target. Point-valued models read
// single-atom records (the atom location is the point).
struct Record {
  ParticleMeasure measure;
  double label = 0.0;
};
using Dataset = std::vector<Record>;

// ŷ = weight · ∫x_1 dμ/μ(E). The smallest trainable model; used for
// optimizer sanity checks and toy regressions.
struct LinearModel {
  double weight = 0.0;
};

using Model = std::variant<LinearModel, TopologicalNetwork, DistributionalNetwork,
                           PracticalNetwork>;

double model_predict(const Model& model, const Record& record);

// Stable flattened view of every trainable parameter. Matrix blocks are
// row-major. The layout is the contract between gradient(), fit() and the
// checkpoint format.
struct ParamLayout {
  struct Block {
    std::string name;
    int offset = 0;
    int size = 0;
  };
  std::vector<Block> blocks;
  int total = 0;

  std::string locate(int index) const;  // "block[i]" for error reports
};

ParamLayout param_layout(const Model& model);
Eigen::VectorXd flatten_params(const Model& model);
void unflatten_params(Model& model, const Eigen::VectorXd& theta);

// (1/n) Σ r(f(x_i), y_i). Evaluation failures are rethrown with the record
// index.
double empirical_risk(const Model& model, const Dataset& data, const LossSpec& loss);

// Analytic full-gradient of the batch risk, laid out like flatten_params().
Eigen::VectorXd gradient(const Model& model, const Dataset& batch, const LossSpec& loss);

// Central-difference gradient of the batch risk (step h per coordinate).
Eigen::VectorXd fd_gradient(const Model& model, const Dataset& batch, const LossSpec& loss,
                            double h);

enum class Optimizer { gradient_descent, momentum };
enum class GradientMode { analytic, finite_difference };

struct TrainConfig {
  Optimizer optimizer = Optimizer::gradient_descent;
  double step = 1e-2;
  double momentum_coef = 0.9;
  int iterations = 100;
  int batch = 0;  // <= 0 or >= n: full batch; otherwise seeded-shuffle cycling
  std::uint64_t seed = 0;
  GradientMode mode = GradientMode::analytic;
  double fd_step = 1e-5;

  void validate() const;
};

struct FitResult {
  Model model;
  // risk_trace[t] is the full-dataset risk before update t; the last entry
  // is the final risk. Length iterations + 1.
  std::vector<double> risk_trace;
};

// Thrown when the risk passes 1e12; carries the partial trace.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::string what, std::vector<double> trace)
      : std::runtime_error(std::move(what)), risk_trace(std::move(trace)) {}
  std::vector<double> risk_trace;
};

FitResult fit(Model model, const Dataset& data, const LossSpec& loss,
              const TrainConfig& config);

// Discrete search over monomial power selections for a distributional model:
// every candidate is fitted on the training split and scored on the held-out
// split (every fifth record); ties go to the lexicographically smallest
// candidate.
struct PowerSelection {
  std::vector<std::vector<int>> powers;
  Model model;
  double heldout_risk = 0.0;
};

PowerSelection select_powers(const Dataset& data,
                             const std::vector<std::vector<std::vector<int>>>& candidates,
                             const LossSpec& loss, const TrainConfig& config,
                             int head_hidden_width);

}  // namespace tdnn

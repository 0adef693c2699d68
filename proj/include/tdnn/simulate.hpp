#pragma once

#include "tdnn/measure.hpp"
#include "tdnn/training.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tdnn {

// Scalar linear-Gaussian hidden Markov model:
//   x_0 ~ N(init_mean, init_var)
//   x_i = trans_coef·x_{i-1} + trans_offset + N(0, trans_var)
//   y_i = obs_coef·x_i + N(0, obs_var)
struct HmmSpec {
  double init_mean = 0.0;
  double init_var = 1.0;
  double trans_coef = 1.0;
  double trans_offset = 0.0;
  double trans_var = 1.0;
  double obs_coef = 1.0;
  double obs_var = 1.0;
  int horizon = 1;
  int regime_label = 0;

  void validate() const;
};

struct HmmPath {
  std::vector<double> hidden;  // x_1..x_T
  std::vector<double> obs;     // y_1..y_T
};

HmmPath hmm_generate(const HmmSpec& spec, std::uint64_t seed);

// Belief state after one filter step: the unnormalized particle measure plus
// the per-particle likelihood factor applied at that step (kept so the total
// mass can be cross-checked through an independent log-domain accumulation).
struct FilterState {
  ParticleMeasure belief;
  std::vector<double> step_loglik;
  int step = 0;
};

// Bootstrap particle filter: propagate by the transition kernel, reweight by
// the observation likelihood, optional multinomial resampling. Weights are
// carried in the log domain and exponentiated on export. Throws
// std::runtime_error with the step index if every likelihood underflows.
std::vector<FilterState> bootstrap_filter(const HmmSpec& spec,
                                          const std::vector<double>& observations,
                                          int particle_count, std::uint64_t seed,
                                          bool resample);

// Classification dataset: one record per (regime, run) pairing the terminal
// belief measure with the regime label, interleaved run-major so classes stay
// balanced under any prefix split. Record k uses seed base_seed + k.
Dataset make_belief_dataset(const std::vector<HmmSpec>& regimes, int runs_per_regime,
                            int particle_count, std::uint64_t seed);

enum class TargetFunctional {
  normalized_mean,      // ∫ x dμ/μ(E)
  normalized_variance,  // ∫ x² dμ/μ(E) − (∫ x dμ/μ(E))²
  arctan_mass,          // arctan(μ(E))
  mass_weighted_mean    // arctan(μ(E)) · ∫ x dμ/μ(E)
};

TargetFunctional target_from_name(const std::string& name);
std::string target_name(TargetFunctional target);

double functional_value(TargetFunctional target, const ParticleMeasure& mu);

// Random one-dimensional measures on [0,1] (atom count uniform in
// [atoms_min, atoms_max], locations uniform in [0,1], weights uniform in
// [0.1, 1)), labeled with the exact functional value.
Dataset make_functional_dataset(TargetFunctional target, int count, int atoms_min,
                                int atoms_max, std::uint64_t seed);

}  // namespace tdnn

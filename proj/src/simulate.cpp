#include "tdnn/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace tdnn {

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;

double gaussian_loglik(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLogTwoPi + std::log(var) + d * d / var);
}

double logsumexp(const std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  CompensatedSum acc;
  for (double x : v) acc.add(std::exp(x - mx));
  return mx + std::log(acc.value());
}

}  // namespace

void HmmSpec::validate() const {
  if (init_var < 0.0 || trans_var < 0.0 || obs_var < 0.0) {
    throw std::invalid_argument("HmmSpec: variances must be >= 0");
  }
  if (horizon < 1) throw std::invalid_argument("HmmSpec: horizon must be >= 1");
}

HmmPath hmm_generate(const HmmSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  HmmPath path;
  path.hidden.reserve(static_cast<size_t>(spec.horizon));
  path.obs.reserve(static_cast<size_t>(spec.horizon));
  double x = spec.init_mean + std::sqrt(spec.init_var) * gauss(rng);
  for (int i = 0; i < spec.horizon; ++i) {
    x = spec.trans_coef * x + spec.trans_offset + std::sqrt(spec.trans_var) * gauss(rng);
    const double y = spec.obs_coef * x + std::sqrt(spec.obs_var) * gauss(rng);
    path.hidden.push_back(x);
    path.obs.push_back(y);
  }
  return path;
}

std::vector<FilterState> bootstrap_filter(const HmmSpec& spec,
                                          const std::vector<double>& observations,
                                          int particle_count, std::uint64_t seed,
                                          bool resample) {
  spec.validate();
  if (particle_count < 1) {
    throw std::invalid_argument("bootstrap_filter: particle count must be >= 1");
  }
  if (observations.empty()) {
    throw std::invalid_argument("bootstrap_filter: no observations");
  }
  if (spec.obs_var == 0.0) {
    throw std::invalid_argument("bootstrap_filter: observation variance must be > 0");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const size_t m = static_cast<size_t>(particle_count);
  std::vector<double> particles(m), logw(m, 0.0);
  for (double& p : particles) p = spec.init_mean + std::sqrt(spec.init_var) * gauss(rng);

  std::vector<FilterState> states;
  states.reserve(observations.size());
  for (size_t n = 0; n < observations.size(); ++n) {
    std::vector<double> step_loglik(m);
    for (size_t j = 0; j < m; ++j) {
      particles[j] = spec.trans_coef * particles[j] + spec.trans_offset +
                     std::sqrt(spec.trans_var) * gauss(rng);
      step_loglik[j] = gaussian_loglik(observations[n], spec.obs_coef * particles[j],
                                       spec.obs_var);
      logw[j] += step_loglik[j];
    }
    const double log_total = logsumexp(logw);
    if (!std::isfinite(log_total)) {
      throw std::runtime_error("bootstrap_filter: weight underflow at step " +
                               std::to_string(n));
    }

    std::vector<Atom> atoms;
    atoms.reserve(m);
    for (size_t j = 0; j < m; ++j) {
      const double w = std::exp(logw[j]);
      if (!(w > 0.0)) {
        throw std::runtime_error("bootstrap_filter: weight underflow at step " +
                                 std::to_string(n));
      }
      atoms.push_back({Point::Constant(1, particles[j]), w});
    }
    states.push_back({ParticleMeasure(std::move(atoms), 1), std::move(step_loglik),
                      static_cast<int>(n)});

    if (resample) {
      // multinomial resampling preserving total mass
      std::vector<double> cdf(m);
      CompensatedSum acc;
      for (size_t j = 0; j < m; ++j) {
        acc.add(std::exp(logw[j] - log_total));
        cdf[j] = acc.value();
      }
      cdf.back() = 1.0;
      std::vector<double> next(m);
      for (size_t j = 0; j < m; ++j) {
        const double u = unif(rng);
        const size_t pick = static_cast<size_t>(
            std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        next[j] = particles[std::min(pick, m - 1)];
      }
      particles = std::move(next);
      const double equal_logw = log_total - std::log(static_cast<double>(m));
      std::fill(logw.begin(), logw.end(), equal_logw);
    }
  }
  return states;
}

Dataset make_belief_dataset(const std::vector<HmmSpec>& regimes, int runs_per_regime,
                            int particle_count, std::uint64_t seed) {
  if (regimes.size() < 2) {
    throw std::invalid_argument("make_belief_dataset: need at least two regimes");
  }
  if (runs_per_regime < 1) {
    throw std::invalid_argument("make_belief_dataset: runs must be >= 1");
  }
  Dataset data;
  data.reserve(static_cast<size_t>(runs_per_regime) * regimes.size());
  std::uint64_t record_index = 0;
  for (int run = 0; run < runs_per_regime; ++run) {
    for (const HmmSpec& spec : regimes) {
      const std::uint64_t run_seed = seed + record_index++;
      const HmmPath path = hmm_generate(spec, run_seed);
      const auto states =
          bootstrap_filter(spec, path.obs, particle_count, run_seed ^ 0x9e3779b97f4a7c15ULL,
                           false);
      data.push_back({states.back().belief, static_cast<double>(spec.regime_label)});
    }
  }
  return data;
}

TargetFunctional target_from_name(const std::string& name) {
  if (name == "normalized_mean") return TargetFunctional::normalized_mean;
  if (name == "normalized_variance") return TargetFunctional::normalized_variance;
  if (name == "arctan_mass") return TargetFunctional::arctan_mass;
  if (name == "mass_weighted_mean") return TargetFunctional::mass_weighted_mean;
  throw std::invalid_argument("unsupported target functional: " + name);
}

std::string target_name(TargetFunctional target) {
  switch (target) {
    case TargetFunctional::normalized_mean: return "normalized_mean";
    case TargetFunctional::normalized_variance: return "normalized_variance";
    case TargetFunctional::arctan_mass: return "arctan_mass";
    case TargetFunctional::mass_weighted_mean: return "mass_weighted_mean";
  }
  throw std::logic_error("target_name: bad enum");
}

double functional_value(TargetFunctional target, const ParticleMeasure& mu) {
  const auto mean = [&] {
    return integrate_fn([](const Point& p) { return p(0); }, mu, true);
  };
  switch (target) {
    case TargetFunctional::normalized_mean:
      return mean();
    case TargetFunctional::normalized_variance: {
      const double m1 = mean();
      const double m2 = integrate_fn([](const Point& p) { return p(0) * p(0); }, mu, true);
      return m2 - m1 * m1;
    }
    case TargetFunctional::arctan_mass:
      return std::atan(mu.total_mass());
    case TargetFunctional::mass_weighted_mean:
      return std::atan(mu.total_mass()) * mean();
  }
  throw std::logic_error("functional_value: bad enum");
}

Dataset make_functional_dataset(TargetFunctional target, int count, int atoms_min,
                                int atoms_max, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("make_functional_dataset: count must be >= 1");
  if (atoms_min < 1 || atoms_max < atoms_min) {
    throw std::invalid_argument("make_functional_dataset: bad atom range");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> natoms(atoms_min, atoms_max);
  std::uniform_real_distribution<double> loc(0.0, 1.0);
  std::uniform_real_distribution<double> wgt(0.1, 1.0);
  Dataset data;
  data.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int n = natoms(rng);
    std::vector<Atom> atoms;
    atoms.reserve(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
      atoms.push_back({Point::Constant(1, loc(rng)), wgt(rng)});
    }
    ParticleMeasure mu(std::move(atoms), 1);
    const double label = functional_value(target, mu);
    data.push_back({std::move(mu), label});
  }
  return data;
}

}  // namespace tdnn

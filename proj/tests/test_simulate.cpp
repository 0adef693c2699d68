#include "tdnn/simulate.hpp"

#include "tdnn/dataset.hpp"

#include <doctest.h>

#include <cmath>

using namespace tdnn;

namespace {

// closed-form Kalman step for the scalar linear-Gaussian model
struct KalmanPosterior {
  double mean;
  double var;
};

KalmanPosterior kalman_one_step(const HmmSpec& s, double y) {
  const double pred_mean = s.trans_coef * s.init_mean + s.trans_offset;
  const double pred_var = s.trans_coef * s.trans_coef * s.init_var + s.trans_var;
  const double innov_var = s.obs_coef * s.obs_coef * pred_var + s.obs_var;
  const double gain = pred_var * s.obs_coef / innov_var;
  return {pred_mean + gain * (y - s.obs_coef * pred_mean),
          (1.0 - gain * s.obs_coef) * pred_var};
}

double weighted_mean(const ParticleMeasure& mu) {
  return integrate_fn([](const Point& p) { return p(0); }, mu, true);
}

}  // namespace

TEST_CASE("degenerate kernels give constant paths") {
  HmmSpec spec;
  spec.init_mean = 0.7;
  spec.init_var = 0.0;
  spec.trans_coef = 1.0;
  spec.trans_var = 0.0;
  spec.obs_var = 0.0;
  spec.horizon = 5;
  const HmmPath path = hmm_generate(spec, 123);
  for (int i = 0; i < 5; ++i) {
    CHECK(path.hidden[static_cast<size_t>(i)] == doctest::Approx(0.7));
    CHECK(path.obs[static_cast<size_t>(i)] == doctest::Approx(0.7));
  }
}

TEST_CASE("fixed seeds reproduce paths") {
  HmmSpec spec;
  spec.horizon = 20;
  const HmmPath a = hmm_generate(spec, 99), b = hmm_generate(spec, 99);
  CHECK(a.hidden == b.hidden);
  CHECK(a.obs == b.obs);
  const HmmPath c = hmm_generate(spec, 100);
  CHECK(a.hidden != c.hidden);
}

TEST_CASE("sample mean of the first step matches the Gaussian closed form") {
  HmmSpec spec;
  spec.init_mean = 0.4;
  spec.init_var = 0.3;
  spec.trans_coef = 0.8;
  spec.trans_offset = 0.5;
  spec.trans_var = 0.2;
  spec.horizon = 1;
  const int runs = 100000;
  CompensatedSum acc;
  for (int i = 0; i < runs; ++i) {
    acc.add(hmm_generate(spec, 1000 + static_cast<std::uint64_t>(i)).hidden[0]);
  }
  const double mean = acc.value() / runs;
  const double want = spec.trans_coef * spec.init_mean + spec.trans_offset;  // 0.82
  const double var = spec.trans_coef * spec.trans_coef * spec.init_var + spec.trans_var;
  const double se = std::sqrt(var / runs);
  CHECK(std::abs(mean - want) < 3.0 * se);
}

TEST_CASE("single deterministic particle tracks its own path") {
  HmmSpec spec;
  spec.init_mean = 0.2;
  spec.init_var = 0.0;
  spec.trans_coef = 0.9;
  spec.trans_offset = 0.1;
  spec.trans_var = 0.0;
  spec.obs_var = 0.5;
  spec.horizon = 4;
  const HmmPath path = hmm_generate(spec, 7);
  const auto states = bootstrap_filter(spec, path.obs, 1, 8, false);
  double x = 0.2;
  for (size_t n = 0; n < states.size(); ++n) {
    x = 0.9 * x + 0.1;
    CHECK(states[n].belief.size() == 1);
    CHECK(states[n].belief.atoms()[0].location(0) == doctest::Approx(x));
    CHECK(weighted_mean(states[n].belief) == doctest::Approx(x));
  }
}

TEST_CASE("one-step weights equal prior weight times likelihood (two particles)") {
  HmmSpec spec;
  spec.init_mean = 0.0;
  spec.init_var = 1.0;
  spec.trans_coef = 1.0;
  spec.trans_var = 0.5;
  spec.obs_coef = 1.0;
  spec.obs_var = 0.7;
  spec.horizon = 1;
  const std::vector<double> obs{0.6};
  const auto states = bootstrap_filter(spec, obs, 2, 21, false);
  REQUIRE(states.size() == 1);
  for (const Atom& a : states[0].belief.atoms()) {
    const double d = obs[0] - a.location(0);
    const double density =
        std::exp(-0.5 * d * d / spec.obs_var) / std::sqrt(2.0 * M_PI * spec.obs_var);
    CHECK(a.weight == doctest::Approx(density).epsilon(1e-12));  // prior weight 1
  }
}

TEST_CASE("filter posterior mean matches the Kalman closed form") {
  HmmSpec spec;
  spec.init_mean = 0.3;
  spec.init_var = 0.4;
  spec.trans_coef = 0.9;
  spec.trans_offset = 0.2;
  spec.trans_var = 0.3;
  spec.obs_coef = 1.0;
  spec.obs_var = 0.5;
  spec.horizon = 1;
  const std::vector<double> obs{1.1};
  const int m = 10000;
  const auto states = bootstrap_filter(spec, obs, m, 77, false);
  const ParticleMeasure& belief = states.back().belief;
  const double mean = weighted_mean(belief);

  // importance-sampling standard error of the weighted mean
  const double mass = belief.total_mass();
  double se2 = 0.0;
  for (const Atom& a : belief.atoms()) {
    const double wbar = a.weight / mass;
    const double d = a.location(0) - mean;
    se2 += wbar * wbar * d * d;
  }
  const double se = std::sqrt(se2);
  const KalmanPosterior post = kalman_one_step(spec, obs[0]);
  CHECK(std::abs(mean - post.mean) < 3.0 * se);
}

TEST_CASE("resampling keeps particle count and total mass") {
  HmmSpec spec;
  spec.horizon = 6;
  spec.trans_var = 0.4;
  spec.obs_var = 0.4;
  const HmmPath path = hmm_generate(spec, 11);
  const auto plain = bootstrap_filter(spec, path.obs, 200, 12, false);
  const auto resampled = bootstrap_filter(spec, path.obs, 200, 12, true);
  for (const auto& s : resampled) CHECK(s.belief.size() == 200);
  // resampling preserves the mass estimate in expectation; totals stay finite
  CHECK(resampled.back().belief.total_mass() > 0.0);
  CHECK(plain.back().belief.total_mass() > 0.0);
}

TEST_CASE("filter aborts on weight underflow with the step index") {
  HmmSpec spec;
  spec.init_mean = 0.0;
  spec.init_var = 0.01;
  spec.trans_var = 0.01;
  spec.obs_var = 1e-10;
  spec.horizon = 1;
  const std::vector<double> obs{1e6};
  CHECK_THROWS_WITH_AS(bootstrap_filter(spec, obs, 5, 3, false),
                       "bootstrap_filter: weight underflow at step 0", std::runtime_error);
}

TEST_CASE("belief dataset is balanced, labeled and reproducible") {
  HmmSpec a;
  a.regime_label = 0;
  a.horizon = 3;
  HmmSpec b;
  b.trans_offset = 2.0;
  b.regime_label = 1;
  b.horizon = 3;
  CHECK_THROWS_AS(make_belief_dataset({a, b}, 0, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_belief_dataset({a}, 5, 10, 1), std::invalid_argument);

  const Dataset data = make_belief_dataset({a, b}, 10, 25, 42);
  REQUIRE(data.size() == 20);
  int zeros = 0, ones = 0;
  for (const Record& r : data) (r.label == 0.0 ? zeros : ones)++;
  CHECK(zeros == 10);
  CHECK(ones == 10);

  const Dataset again = make_belief_dataset({a, b}, 10, 25, 42);
  for (size_t i = 0; i < data.size(); ++i) {
    CHECK(format_record(data[i]) == format_record(again[i]));
  }
}

TEST_CASE("functional targets match their definitions") {
  const auto sym = ParticleMeasure::from_pairs({{0.2, 1.0}, {0.8, 1.0}});
  CHECK(functional_value(TargetFunctional::normalized_mean, sym) == doctest::Approx(0.5));

  const auto mu = ParticleMeasure::from_pairs({{0.2, 0.3}, {0.7, 0.7}});
  CHECK(functional_value(TargetFunctional::normalized_variance, mu) ==
        doctest::Approx(0.0525));

  const auto unit = ParticleMeasure::from_pairs({{0.4, 0.25}, {0.9, 0.75}});
  CHECK(functional_value(TargetFunctional::arctan_mass, unit) == doctest::Approx(M_PI / 4));
  CHECK(functional_value(TargetFunctional::mass_weighted_mean, unit) ==
        doctest::Approx((M_PI / 4) *
                        functional_value(TargetFunctional::normalized_mean, unit)));
}

TEST_CASE("functional dataset labels agree with recomputation") {
  const Dataset data = make_functional_dataset(TargetFunctional::normalized_variance, 50, 1,
                                               8, 7);
  REQUIRE(data.size() == 50);
  for (const Record& r : data) {
    CHECK(r.label ==
          doctest::Approx(functional_value(TargetFunctional::normalized_variance, r.measure))
              .epsilon(1e-15));
    CHECK(r.measure.dim() == 1);
    for (const Atom& a : r.measure.atoms()) {
      CHECK(a.location(0) >= 0.0);
      CHECK(a.location(0) <= 1.0);
      CHECK(a.weight >= 0.1);
    }
  }
}

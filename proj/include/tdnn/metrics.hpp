#pragma once

#include "tdnn/measure.hpp"
#include "tdnn/testfn.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace tdnn {

// A truncated ordered family {g_i} with its mass channel. Defines both the
// point metric (weights 2^-1, 2^-2, ...) and the measure metric (mass term
// plus weights 2^-2, 2^-3, ... over the family). Truncation makes these
// pseudometrics; identity of indiscernibles is only claimed for the full
// countable family.
struct SSPMetricConfig {
  std::vector<TestFunction> family;
  MassChannel mass_channel;

  void validate() const;
};

// d(x,y) = Σ_{i=1}^N 2^{-i} (|g_i(x) − g_i(y)| ∧ 1), family[0] ↔ i=1.
// Always in [0, 1).
double point_metric(const SSPMetricConfig& cfg, const Point& x, const Point& y);

struct MeasureMetricBreakdown {
  double mass_term = 0.0;              // |g0(μ(E)) − g0(ν(E))| ∧ 1
  std::vector<double> test_terms;      // 2^{-i} (|g_i*(μ̄) − g_i*(ν̄)| ∧ 1), i from 2
  double total = 0.0;
};

// d(μ,ν) = mass term + Σ_{i=2}^N 2^{-i} (|g_i*(μ/μ(E)) − g_i*(ν/ν(E))| ∧ 1),
// family[0] ↔ i=2. Always in [0, 1.5).
double measure_metric(const SSPMetricConfig& cfg, const ParticleMeasure& mu,
                      const ParticleMeasure& nu);
MeasureMetricBreakdown measure_metric_breakdown(const SSPMetricConfig& cfg,
                                                const ParticleMeasure& mu,
                                                const ParticleMeasure& nu);

// Empirical sup distance max_s |f1(s) − f2(s)| over a finite sample — a lower
// bound on the true sup metric. An evaluation failure is rethrown with the
// offending sample index.
template <typename F1, typename F2, typename Range>
double sup_distance(F1&& f1, F2&& f2, const Range& sample) {
  if (std::begin(sample) == std::end(sample)) {
    throw std::invalid_argument("sup_distance: empty sample");
  }
  double best = 0.0;
  size_t index = 0;
  for (const auto& s : sample) {
    double d;
    try {
      d = std::abs(f1(s) - f2(s));
    } catch (const std::exception& e) {
      throw std::runtime_error("sup_distance: evaluation failed at sample index " +
                               std::to_string(index) + ": " + e.what());
    }
    if (d > best) best = d;
    ++index;
  }
  return best;
}

}  // namespace tdnn

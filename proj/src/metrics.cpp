#include "tdnn/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace tdnn {

void SSPMetricConfig::validate() const {
  if (family.empty()) throw std::invalid_argument("SSPMetricConfig: empty family");
  const int d = family.front().dim();
  for (const TestFunction& g : family) {
    if (g.dim() != d) throw std::invalid_argument("SSPMetricConfig: mixed family dimensions");
  }
}

double point_metric(const SSPMetricConfig& cfg, const Point& x, const Point& y) {
  cfg.validate();
  if (x.size() != y.size() || x.size() != cfg.family.front().dim()) {
    throw std::invalid_argument("point_metric: dimension mismatch");
  }
  CompensatedSum acc;
  double weight = 0.5;  // 2^{-1} for family[0]
  for (const TestFunction& g : cfg.family) {
    acc.add(weight * std::min(std::abs(g.eval(x) - g.eval(y)), 1.0));
    weight *= 0.5;
  }
  return acc.value();
}

MeasureMetricBreakdown measure_metric_breakdown(const SSPMetricConfig& cfg,
                                                const ParticleMeasure& mu,
                                                const ParticleMeasure& nu) {
  cfg.validate();
  if (mu.dim() != nu.dim() || mu.dim() != cfg.family.front().dim()) {
    throw std::invalid_argument("measure_metric: dimension mismatch");
  }
  MeasureMetricBreakdown out;
  out.mass_term = std::min(
      std::abs(cfg.mass_channel(mu.total_mass()) - cfg.mass_channel(nu.total_mass())), 1.0);
  CompensatedSum acc;
  acc.add(out.mass_term);
  double weight = 0.25;  // 2^{-2} for family[0]
  out.test_terms.reserve(cfg.family.size());
  for (const TestFunction& g : cfg.family) {
    const double term =
        weight * std::min(std::abs(integrate(g, mu, true) - integrate(g, nu, true)), 1.0);
    out.test_terms.push_back(term);
    acc.add(term);
    weight *= 0.5;
  }
  out.total = acc.value();
  return out;
}

double measure_metric(const SSPMetricConfig& cfg, const ParticleMeasure& mu,
                      const ParticleMeasure& nu) {
  return measure_metric_breakdown(cfg, mu, nu).total;
}

}  // namespace tdnn

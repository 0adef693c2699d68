#pragma once

#include "tdnn/summation.hpp"
#include "tdnn/testfn.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace tdnn {

// One weighted point mass. The weight plays the role of a particle
// likelihood, so it must be strictly positive.
struct Atom {
  Point location;
  double weight = 1.0;
};

// A finite atomic positive measure μ = Σ_j w_j δ_{x_j} on a subset of ℝ^D.
// Immutable after construction; all queries are pure and thread-safe.
class ParticleMeasure {
 public:
  ParticleMeasure(std::vector<Atom> atoms, int dim);

  // Convenience for one-dimensional measures given as (location, weight) pairs.
  static ParticleMeasure from_pairs(const std::vector<std::pair<double, double>>& pairs);

  int dim() const { return dim_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  size_t size() const { return atoms_.size(); }

  // μ(E) = Σ_j w_j, compensated summation; strictly positive by construction.
  double total_mass() const;

  // μ / μ(E): same atom locations, weights divided by the total mass.
  ParticleMeasure normalized() const;

  // Measure with every weight multiplied by c > 0.
  ParticleMeasure scaled(double c) const;

  // Atoms reordered by `perm` (a permutation of 0..size-1).
  ParticleMeasure permuted(const std::vector<size_t>& perm) const;

 private:
  std::vector<Atom> atoms_;
  int dim_ = 0;
};

// ∫ f dμ (or ∫ f dμ/μ(E) when `normalized`) for any point functional f.
// Exact weighted sum over atoms with compensated accumulation.
template <typename F>
double integrate_fn(F&& f, const ParticleMeasure& mu, bool normalized) {
  CompensatedSum acc;
  for (const Atom& a : mu.atoms()) {
    acc.add(a.weight * f(a.location));
  }
  return normalized ? acc.value() / mu.total_mass() : acc.value();
}

// g*(μ) = ∫ g dμ, resp. g*(μ/μ(E)).
double integrate(const TestFunction& g, const ParticleMeasure& mu, bool normalized);

// Moment generating function M_μ(v) = Σ_j w_j e^{v·x_j} (unnormalized).
// Throws std::overflow_error when any exponent |v·x_j| exceeds 700, past
// which the result would silently turn infinite.
double mgf(const ParticleMeasure& mu, const Point& v);

}  // namespace tdnn

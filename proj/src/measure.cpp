#include "tdnn/measure.hpp"

#include <cmath>
#include <utility>

namespace tdnn {

ParticleMeasure::ParticleMeasure(std::vector<Atom> atoms, int dim)
    : atoms_(std::move(atoms)), dim_(dim) {
  if (dim_ < 1) throw std::invalid_argument("ParticleMeasure: dim must be >= 1");
  if (atoms_.empty()) {
    throw std::invalid_argument("ParticleMeasure: needs at least one atom");
  }
  for (const Atom& a : atoms_) {
    if (a.location.size() != dim_) {
      throw std::invalid_argument("ParticleMeasure: atom dimension mismatch");
    }
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
      throw std::invalid_argument("ParticleMeasure: atom weight must be finite and > 0");
    }
  }
}

ParticleMeasure ParticleMeasure::from_pairs(
    const std::vector<std::pair<double, double>>& pairs) {
  std::vector<Atom> atoms;
  atoms.reserve(pairs.size());
  for (const auto& [x, w] : pairs) {
    atoms.push_back({Point::Constant(1, x), w});
  }
  return ParticleMeasure(std::move(atoms), 1);
}

double ParticleMeasure::total_mass() const {
  CompensatedSum acc;
  for (const Atom& a : atoms_) acc.add(a.weight);
  return acc.value();
}

ParticleMeasure ParticleMeasure::normalized() const {
  const double mass = total_mass();
  std::vector<Atom> atoms = atoms_;
  for (Atom& a : atoms) a.weight /= mass;
  return ParticleMeasure(std::move(atoms), dim_);
}

ParticleMeasure ParticleMeasure::scaled(double c) const {
  if (!(c > 0.0)) throw std::invalid_argument("scaled: factor must be > 0");
  std::vector<Atom> atoms = atoms_;
  for (Atom& a : atoms) a.weight *= c;
  return ParticleMeasure(std::move(atoms), dim_);
}

ParticleMeasure ParticleMeasure::permuted(const std::vector<size_t>& perm) const {
  if (perm.size() != atoms_.size()) {
    throw std::invalid_argument("permuted: permutation size mismatch");
  }
  std::vector<Atom> atoms;
  atoms.reserve(atoms_.size());
  for (size_t i : perm) atoms.push_back(atoms_.at(i));
  return ParticleMeasure(std::move(atoms), dim_);
}

double integrate(const TestFunction& g, const ParticleMeasure& mu, bool normalized) {
  if (g.dim() != mu.dim()) {
    throw std::invalid_argument("integrate: test function and measure dimensions differ");
  }
  return integrate_fn([&](const Point& p) { return g.eval(p); }, mu, normalized);
}

double mgf(const ParticleMeasure& mu, const Point& v) {
  if (v.size() != mu.dim()) {
    throw std::invalid_argument("mgf: direction and measure dimensions differ");
  }
  CompensatedSum acc;
  for (const Atom& a : mu.atoms()) {
    const double e = v.dot(a.location);
    if (std::abs(e) > 700.0) {
      throw std::overflow_error("mgf: exponent magnitude exceeds 700");
    }
    acc.add(a.weight * std::exp(e));
  }
  return acc.value();
}

}  // namespace tdnn

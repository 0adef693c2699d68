#include "tdnn/verify.hpp"

#include "tdnn/dataset.hpp"
#include "tdnn/metrics.hpp"
#include "tdnn/nets.hpp"
#include "tdnn/simulate.hpp"
#include "tdnn/training.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

namespace tdnn {

namespace {

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  }
  Point point_in_box(int dim) {
    Point p(dim);
    for (int i = 0; i < dim; ++i) p(i) = uniform(0.0, 1.0);
    return p;
  }
  ParticleMeasure measure_in_box(int dim, int max_atoms = 6) {
    const int n = uniform_int(1, max_atoms);
    std::vector<Atom> atoms;
    atoms.reserve(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) atoms.push_back({point_in_box(dim), uniform(0.1, 2.0)});
    return ParticleMeasure(std::move(atoms), dim);
  }
  std::vector<size_t> permutation(size_t n) {
    std::vector<size_t> p(n);
    for (size_t i = 0; i < n; ++i) p[i] = i;
    std::shuffle(p.begin(), p.end(), rng);
    return p;
  }
};

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string describe(double got, double want) {
  std::ostringstream os;
  os.precision(17);
  os << "got " << got << ", expected " << want;
  return os.str();
}

using Suite = std::function<SuiteResult()>;

SuiteResult run_suite(const std::string& name, int cases,
                      const std::function<std::string(int)>& one_case) {
  SuiteResult result{name, true, cases, ""};
  for (int i = 0; i < cases; ++i) {
    std::string err;
    try {
      err = one_case(i);
    } catch (const std::exception& e) {
      err = std::string("exception: ") + e.what();
    }
    if (!err.empty()) {
      result.passed = false;
      result.detail = "case " + std::to_string(i) + ": " + err;
      break;
    }
  }
  return result;
}

// ---------------------------------------------------------------- measure --

SuiteResult measure_integrate_linearity(std::uint64_t seed) {
  Gen gen(seed);
  return run_suite("measure.integrate_linearity", 500, [&](int) -> std::string {
    const auto mu = gen.measure_in_box(1);
    const auto g1 = TestFunction::monomial({gen.uniform_int(1, 4)});
    const auto g2 = TestFunction::exp_feature(Point::Constant(1, gen.uniform(-1.0, 1.0)));
    const double a = gen.uniform(-2.0, 2.0), b = gen.uniform(-2.0, 2.0);
    const double combined = integrate_fn(
        [&](const Point& p) { return a * g1.eval(p) + b * g2.eval(p); }, mu, false);
    const double split = a * integrate(g1, mu, false) + b * integrate(g2, mu, false);
    if (!close_rel(combined, split, 1e-12)) return describe(combined, split);
    return "";
  });
}

SuiteResult measure_normalized_scale_invariance(std::uint64_t seed) {
  Gen gen(seed);
  return run_suite("measure.normalized_scale_invariance", 500, [&](int i) -> std::string {
    const auto mu = gen.measure_in_box(1);
    const auto g = TestFunction::monomial({gen.uniform_int(1, 3)});
    const double base = integrate(g, mu, true);
    // dyadic scales rescale every intermediate exactly
    const double dyadic = integrate(g, mu.scaled(i % 2 == 0 ? 2.0 : 0.25), true);
    if (dyadic != base) return "dyadic scale: " + describe(dyadic, base);
    const double arbitrary = integrate(g, mu.scaled(gen.uniform(0.1, 5.0)), true);
    if (!close_rel(arbitrary, base, 1e-12)) return describe(arbitrary, base);
    return "";
  });
}

SuiteResult measure_total_mass_scaling(std::uint64_t seed) {
  Gen gen(seed);
  return run_suite("measure.total_mass_scaling", 500, [&](int) -> std::string {
    const auto mu = gen.measure_in_box(2);
    const double c = gen.uniform(0.1, 10.0);
    const double got = mu.scaled(c).total_mass();
    const double want = c * mu.total_mass();
    if (!close_rel(got, want, 1e-12)) return describe(got, want);
    return "";
  });
}

SuiteResult measure_mgf_consistency(std::uint64_t seed) {
  Gen gen(seed);
  return run_suite("measure.mgf_consistency", 500, [&](int) -> std::string {
    const auto mu = gen.measure_in_box(2);
    Point v(2);
    v << gen.uniform(-2.0, 2.0), gen.uniform(-2.0, 2.0);
    const double via_mgf = mgf(mu, v);
    const double via_integrate = integrate(TestFunction::exp_feature(v), mu, false);
    if (via_mgf != via_integrate) return describe(via_mgf, via_integrate);
    return "";
  });
}

SuiteResult measure_permutation_invariance(std::uint64_t seed) {
  Gen gen(seed);
  return run_suite("measure.permutation_invariance", 500, [&](int) -> std::string {
    const auto mu = gen.measure_in_box(1, 12);
    const auto pi = mu.permuted(gen.permutation(mu.size()));
    const auto g = TestFunction::monomial({gen.uniform_int(1, 4)});
    if (!close_rel(mu.total_mass(), pi.total_mass(), 1e-12)) {
      return "total_mass: " + describe(pi.total_mass(), mu.total_mass());
    }
    const double a = integrate(g, mu, true), b = integrate(g, pi, true);
    if (!close_rel(a, b, 1e-12)) return "integrate: " + describe(b, a);
    Point v = Point::Constant(1, gen.uniform(-1.0, 1.0));
    if (!close_rel(mgf(mu, v), mgf(pi, v), 1e-12)) {
      return "mgf: " + describe(mgf(pi, v), mgf(mu, v));
    }
    return "";
  });
}

// ----------------------------------------------------------------- testfn --

SuiteResult testfn_boundedness(std::uint64_t seed) {
  Gen gen(seed);
  Point v(2);
  v << 0.8, -0.5;
  const std::vector<TestFunction> fns = {
      TestFunction::monomial({2, 3}),
      TestFunction::bump((Point(2) << 0.5, 0.5).finished(), 3.0),
      TestFunction::exp_feature(v),
  };
  const double exp_bound = std::exp(v.norm() * std::sqrt(2.0));
  return run_suite("testfn.boundedness", 10000, [&](int i) -> std::string {
    const Point p = gen.point_in_box(2);
    const TestFunction& g = fns[static_cast<size_t>(i) % fns.size()];
    const double val = g.eval(p);
    const double bound = g.kind() == "exp" ? exp_bound : 1.0;
    if (!(std::abs(val) <= bound + 1e-12)) {
      return g.kind() + " exceeded bound: " + describe(val, bound);
    }
    return "";
  });
}

SuiteResult testfn_gradient_fd(std::uint64_t seed) {
  Gen gen(seed);
  return run_suite("testfn.gradient_finite_difference", 200, [&](int i) -> std::string {
    TestFunction g = (i % 2 == 0)
        ? TestFunction::exp_feature(
              (Point(2) << gen.uniform(-1, 1), gen.uniform(-1, 1)).finished(), true)
        : TestFunction::bump(
              (Point(2) << gen.uniform(0.3, 0.7), gen.uniform(0.3, 0.7)).finished(),
              gen.uniform(1.0, 2.0), true);
    const Point p = gen.point_in_box(2);
    // stay away from the bump kink and center, where the subgradient is pinned
    if (g.kind() == "bump") {
      const auto& b = std::get<Bump>(g.node());
      const double d = euclidean_distance(p, b.center);
      const double margin = 1.0 - b.scale * d;
      if (d < 0.05 || std::abs(margin) < 0.05) return "";
    }
    const Eigen::VectorXd analytic = g.param_grad(p);
    const Eigen::VectorXd theta = g.params();
    const double h = 1e-5;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      Eigen::VectorXd t = theta;
      t(k) = theta(k) + h;
      TestFunction up = g;
      up.set_params(t);
      t(k) = theta(k) - h;
      TestFunction down = g;
      down.set_params(t);
      const double fd = (up.eval(p) - down.eval(p)) / (2.0 * h);
      const double denom = std::max({1e-8, std::abs(fd), std::abs(analytic(k))});
      if (std::abs(analytic(k) - fd) / denom > 1e-6) {
        return g.kind() + " param " + std::to_string(k) + ": " +
               describe(analytic(k), fd);
      }
    }
    return "";
  });
}

SuiteResult testfn_product_consistency(std::uint64_t seed) {
  Gen gen(seed);
  return run_suite("testfn.product_consistency", 500, [&](int i) -> std::string {
    TestFunction g1 = TestFunction::monomial({gen.uniform_int(0, 3), gen.uniform_int(0, 3)});
    TestFunction g2 =
        (i % 2 == 0)
            ? TestFunction::monomial({gen.uniform_int(0, 3), gen.uniform_int(0, 3)})
            : TestFunction::exp_feature(
                  (Point(2) << gen.uniform(-1, 1), gen.uniform(-1, 1)).finished());
    const TestFunction prod = product(g1, g2);
    const Point p = gen.point_in_box(2);
    const double got = prod.eval(p);
    const double want = g1.eval(p) * g2.eval(p);
    if (!close_rel(got, want, 1e-14)) return describe(got, want);
    return "";
  });
}

SuiteResult testfn_mass_channel_monotonic(std::uint64_t seed) {
  Gen gen(seed);
  const MassChannel g0;
  return run_suite("testfn.mass_channel_monotonic", 1000, [&](int) -> std::string {
    const double m1 = gen.uniform(1e-6, 50.0);
    const double m2 = m1 + gen.uniform(1e-6, 50.0);
    if (!(g0(m1) < g0(m2))) return describe(g0(m1), g0(m2));
    if (!(std::abs(g0(m1)) < M_PI / 2)) return "unbounded value";
    return "";
  });
}

// ---------------------------------------------------------------- metrics --

SSPMetricConfig monomial_metric_config(int terms) {
  return {enumerate_family({FamilyKind::monomial, 1, false, {}}, terms), MassChannel{}};
}

// The sabotage harness flips the sign of the first family term. Symmetry and
// d(a,a)=0 survive, the triangle inequality does not.
double sabotaged_point_metric(const SSPMetricConfig& cfg, const Point& x, const Point& y) {
  const double honest = point_metric(cfg, x, y);
  const TestFunction& g = cfg.family.front();
  const double first_term = 0.5 * std::min(std::abs(g.eval(x) - g.eval(y)), 1.0);
  return honest - 2.0 * first_term;
}

SuiteResult metrics_point_axioms(std::uint64_t seed, bool sabotage) {
  Gen gen(seed);
  const SSPMetricConfig cfg = monomial_metric_config(16);
  const auto metric = [&](const Point& x, const Point& y) {
    return sabotage ? sabotaged_point_metric(cfg, x, y) : point_metric(cfg, x, y);
  };
  return run_suite("metrics.point_pseudometric", 10000, [&](int) -> std::string {
    const Point a = gen.point_in_box(1), b = gen.point_in_box(1), c = gen.point_in_box(1);
    if (metric(a, b) != metric(b, a)) return "symmetry violated";
    if (metric(a, a) != 0.0) return "d(a,a) != 0";
    if (!(metric(a, b) < 1.0)) return "value >= 1";
    if (metric(a, c) > metric(a, b) + metric(b, c) + 1e-12) {
      return "triangle inequality violated: d(a,c)=" + std::to_string(metric(a, c)) +
             " > d(a,b)+d(b,c)=" + std::to_string(metric(a, b) + metric(b, c));
    }
    return "";
  });
}

SuiteResult metrics_measure_axioms(std::uint64_t seed) {
  Gen gen(seed);
  const SSPMetricConfig cfg = monomial_metric_config(8);
  return run_suite("metrics.measure_pseudometric", 2000, [&](int) -> std::string {
    const auto a = gen.measure_in_box(1), b = gen.measure_in_box(1), c = gen.measure_in_box(1);
    if (measure_metric(cfg, a, b) != measure_metric(cfg, b, a)) return "symmetry violated";
    if (measure_metric(cfg, a, a) != 0.0) return "d(a,a) != 0";
    if (!(measure_metric(cfg, a, b) < 1.5)) return "value >= 1.5";
    if (measure_metric(cfg, a, c) >
        measure_metric(cfg, a, b) + measure_metric(cfg, b, c) + 1e-12) {
      return "triangle inequality violated";
    }
    return "";
  });
}

SuiteResult metrics_scale_pair(std::uint64_t seed) {
  Gen gen(seed);
  const SSPMetricConfig cfg = monomial_metric_config(8);
  return run_suite("metrics.scale_pair_mass_term_only", 500, [&](int) -> std::string {
    const auto mu = gen.measure_in_box(1);
    const auto breakdown = measure_metric_breakdown(cfg, mu, mu.scaled(gen.uniform(0.2, 5.0)));
    CompensatedSum tail;
    for (double t : breakdown.test_terms) tail.add(t);
    if (!(tail.value() < 1e-12)) return "normalized terms not vanishing: " +
                                        std::to_string(tail.value());
    return "";
  });
}

SuiteResult metrics_convergence_surrogate(std::uint64_t seed) {
  Gen gen(seed);
  const SSPMetricConfig cfg = monomial_metric_config(16);
  return run_suite("metrics.convergence_surrogate", 100, [&](int) -> std::string {
    const int natoms = gen.uniform_int(2, 5);
    std::vector<Atom> limit_atoms;
    std::vector<Point> dirs;
    for (int j = 0; j < natoms; ++j) {
      limit_atoms.push_back({Point::Constant(1, gen.uniform(0.3, 0.7)), gen.uniform(0.2, 1.0)});
      dirs.push_back(Point::Constant(1, gen.uniform(-1.0, 1.0)));
    }
    const ParticleMeasure limit(limit_atoms, 1);
    std::vector<double> dist;
    for (int n = 1; n <= 40; ++n) {
      const double delta = 0.25 * std::pow(0.75, n);
      std::vector<Atom> atoms = limit_atoms;
      for (int j = 0; j < natoms; ++j) {
        atoms[static_cast<size_t>(j)].location += delta * dirs[static_cast<size_t>(j)];
      }
      dist.push_back(measure_metric(cfg, ParticleMeasure(atoms, 1), limit));
    }
    if (!(dist.back() < 1e-3)) return "did not fall below 1e-3: " + std::to_string(dist.back());
    size_t last_increase = 0;
    for (size_t n = 1; n < dist.size(); ++n) {
      if (dist[n] > dist[n - 1]) last_increase = n;
    }
    if (last_increase > dist.size() - 10) {
      return "not eventually decreasing (last increase at step " +
             std::to_string(last_increase) + ")";
    }
    return "";
  });
}

SuiteResult metrics_truncation_monotone(std::uint64_t seed) {
  Gen gen(seed);
  return run_suite("metrics.truncation_monotone", 500, [&](int) -> std::string {
    const Point x = gen.point_in_box(1), y = gen.point_in_box(1);
    double prev = 0.0;
    for (int n = 1; n <= 12; n += 3) {
      const double d = point_metric(monomial_metric_config(n), x, y);
      if (d + 1e-15 < prev) return "metric decreased when extending the family";
      prev = d;
    }
    return "";
  });
}

// ------------------------------------------------------------------- nets --

DistributionalNetwork random_dnn(Gen& gen, int tests, int hidden) {
  return {MassChannel{}, enumerate_family({FamilyKind::monomial, 1, false, {}}, tests),
          OutputNetwork::hornik(1 + tests, hidden, 1, Activation::tanh_, gen.rng())};
}

SuiteResult nets_permutation_invariance(std::uint64_t seed) {
  Gen gen(seed);
  return run_suite("nets.permutation_invariance", 1000, [&](int) -> std::string {
    const auto mu = gen.measure_in_box(1, 10);
    const auto pi = mu.permuted(gen.permutation(mu.size()));
    const auto dnn = random_dnn(gen, 3, 4);
    const double a = dnn_forward(dnn, mu), b = dnn_forward(dnn, pi);
    if (!close_rel(a, b, 1e-12)) return "dnn: " + describe(b, a);
    const auto practical = random_practical(1, 3, 2, 3, Activation::tanh_, gen.rng());
    const double pa = practical_forward(practical, mu), pb = practical_forward(practical, pi);
    if (!close_rel(pa, pb, 1e-12)) return "practical: " + describe(pb, pa);
    return "";
  });
}

SuiteResult nets_mass_scale_factorization(std::uint64_t seed) {
  Gen gen(seed);
  return run_suite("nets.mass_scale_factorization", 200, [&](int) -> std::string {
    DistributionalNetwork dnn = random_dnn(gen, 3, 4);
    auto* head = std::get_if<OutputNetwork>(&dnn.head);
    head->layers().front().input_weights.row(0).setZero();  // ignore the mass channel
    const auto mu = gen.measure_in_box(1);
    const double base = dnn_forward(dnn, mu);
    for (double c : {0.5, 2.0, 10.0}) {
      const double scaled = dnn_forward(dnn, mu.scaled(c));
      if (!close_rel(scaled, base, 1e-9)) {
        return "c=" + std::to_string(c) + ": " + describe(scaled, base);
      }
    }
    return "";
  });
}

SuiteResult nets_deep_sets_equivalence(std::uint64_t seed) {
  Gen gen(seed);
  return run_suite("nets.deep_sets_equivalence", 500, [&](int) -> std::string {
    const int k = gen.uniform_int(1, 3);
    const auto g = enumerate_family({FamilyKind::monomial, 1, false, {}}, k);
    const auto f = OutputNetwork::hornik(k, 3, 1, Activation::tanh_, gen.rng());
    std::vector<Point> points;
    const int n = gen.uniform_int(1, 8);
    for (int i = 0; i < n; ++i) points.push_back(gen.point_in_box(1));
    const double set_form = deep_set_eval(g, f, points);

    std::vector<Atom> atoms;
    for (const Point& p : points) atoms.push_back({p, 1.0});
    const ParticleMeasure mu(atoms, 1);
    Eigen::VectorXd z(k);
    for (int i = 0; i < k; ++i) {
      z(i) = mu.total_mass() * integrate(g[static_cast<size_t>(i)], mu, true);
    }
    const double measure_form = f.eval(z)(0);
    if (!close_rel(set_form, measure_form, 1e-9)) return describe(set_form, measure_form);
    return "";
  });
}

SuiteResult nets_determinism(std::uint64_t seed) {
  Gen gen(seed);
  return run_suite("nets.determinism", 200, [&](int) -> std::string {
    const auto mu = gen.measure_in_box(1);
    const auto dnn = random_dnn(gen, 2, 3);
    if (dnn_forward(dnn, mu) != dnn_forward(dnn, mu)) return "dnn_forward not bit-identical";
    const auto tnn = TopologicalNetwork{
        enumerate_family({FamilyKind::monomial, 1, false, {}}, 2),
        OutputNetwork::hornik(2, 3, 1, Activation::tanh_, gen.rng())};
    const Point p = gen.point_in_box(1);
    if (tnn_forward(tnn, p) != tnn_forward(tnn, p)) return "tnn_forward not bit-identical";
    return "";
  });
}

// --------------------------------------------------------------- training --

Model random_trainable_model(Gen& gen, int which) {
  switch (which % 4) {
    case 0:
      return LinearModel{gen.uniform(-1.0, 1.0)};
    case 1: {
      std::vector<TestFunction> tests;
      tests.push_back(TestFunction::projection(1, 0));
      tests.push_back(TestFunction::exp_feature(Point::Constant(1, gen.uniform(-1, 1)), true));
      return TopologicalNetwork{std::move(tests),
                                OutputNetwork::hornik(2, 3, 1, Activation::tanh_, gen.rng())};
    }
    case 2: {
      std::vector<TestFunction> tests;
      tests.push_back(TestFunction::monomial({1}));
      tests.push_back(TestFunction::exp_feature(Point::Constant(1, gen.uniform(-1, 1)), true));
      tests.push_back(TestFunction::bump(Point::Constant(1, gen.uniform(0.3, 0.7)),
                                         gen.uniform(1.0, 2.0), true));
      return DistributionalNetwork{MassChannel{}, std::move(tests),
                                   OutputNetwork::hornik(4, 3, 1, Activation::tanh_, gen.rng())};
    }
    default:
      return random_practical(1, 3, 2, 3, Activation::tanh_, gen.rng());
  }
}

Dataset random_training_batch(Gen& gen, const Model& model, int records) {
  Dataset data;
  const bool single_atom = std::holds_alternative<TopologicalNetwork>(model);
  for (int i = 0; i < records; ++i) {
    ParticleMeasure mu = single_atom
                             ? ParticleMeasure({{gen.point_in_box(1), 1.0}}, 1)
                             : gen.measure_in_box(1, 5);
    data.push_back({std::move(mu), gen.uniform(-1.0, 1.0)});
  }
  return data;
}

SuiteResult training_gradient_correctness(std::uint64_t seed) {
  Gen gen(seed);
  return run_suite("training.gradient_correctness", 100, [&](int i) -> std::string {
    const Model model = random_trainable_model(gen, i);
    const Dataset batch = random_training_batch(gen, model, 3);
    const LossSpec loss{i % 2 == 0 ? LossKind::squared : LossKind::logistic};
    const Eigen::VectorXd analytic = gradient(model, batch, loss);
    const Eigen::VectorXd fd = fd_gradient(model, batch, loss, 1e-5);
    const ParamLayout layout = param_layout(model);
    for (Eigen::Index k = 0; k < analytic.size(); ++k) {
      const double denom = std::max({1e-6, std::abs(analytic(k)), std::abs(fd(k))});
      if (std::abs(analytic(k) - fd(k)) / denom > 1e-4) {
        return layout.locate(static_cast<int>(k)) + ": " + describe(analytic(k), fd(k));
      }
    }
    return "";
  });
}

SuiteResult training_gd_monotonic(std::uint64_t seed) {
  Gen gen(seed);
  return run_suite("training.gd_monotonic_risk", 20, [&](int) -> std::string {
    Dataset data;
    const double slope = gen.uniform(0.5, 2.0);
    for (int i = 0; i < 20; ++i) {
      const double x = gen.uniform(0.1, 1.0);
      data.push_back({ParticleMeasure::from_pairs({{x, 1.0}}), slope * x});
    }
    TrainConfig cfg;
    cfg.step = 0.05;
    cfg.iterations = 50;
    const FitResult result = fit(LinearModel{0.0}, data, LossSpec{}, cfg);
    for (size_t t = 1; t < result.risk_trace.size(); ++t) {
      if (result.risk_trace[t] > result.risk_trace[t - 1]) {
        return "risk increased at iteration " + std::to_string(t);
      }
    }
    return "";
  });
}

SuiteResult training_fit_determinism(std::uint64_t seed) {
  Gen gen(seed);
  return run_suite("training.fit_determinism", 10, [&](int i) -> std::string {
    const Model model = random_trainable_model(gen, i);
    const Dataset data = random_training_batch(gen, model, 8);
    TrainConfig cfg;
    cfg.step = 0.01;
    cfg.iterations = 20;
    cfg.seed = 7;
    const FitResult a = fit(model, data, LossSpec{}, cfg);
    const FitResult b = fit(model, data, LossSpec{}, cfg);
    if (a.risk_trace != b.risk_trace) return "traces differ";
    if (flatten_params(a.model) != flatten_params(b.model)) return "final parameters differ";
    return "";
  });
}

SuiteResult training_batch_order_invariance(std::uint64_t seed) {
  Gen gen(seed);
  return run_suite("training.batch_order_invariance", 10, [&](int i) -> std::string {
    const Model model = random_trainable_model(gen, i);
    Dataset data = random_training_batch(gen, model, 8);
    TrainConfig cfg;
    cfg.step = 0.01;
    cfg.iterations = 15;
    const FitResult a = fit(model, data, LossSpec{}, cfg);
    Dataset shuffled = data;
    std::shuffle(shuffled.begin(), shuffled.end(), gen.rng);
    const FitResult b = fit(model, shuffled, LossSpec{}, cfg);
    const Eigen::VectorXd pa = flatten_params(a.model), pb = flatten_params(b.model);
    for (Eigen::Index k = 0; k < pa.size(); ++k) {
      if (!close_rel(pa(k), pb(k), 1e-12)) {
        return "parameter " + std::to_string(k) + ": " + describe(pb(k), pa(k));
      }
    }
    for (size_t t = 0; t < a.risk_trace.size(); ++t) {
      if (!close_rel(a.risk_trace[t], b.risk_trace[t], 1e-12)) {
        return "trace diverged at iteration " + std::to_string(t);
      }
    }
    return "";
  });
}

// --------------------------------------------------------------- simulate --

SuiteResult simulate_filter_invariants(std::uint64_t seed) {
  Gen gen(seed);
  return run_suite("simulate.filter_invariants", 20, [&](int i) -> std::string {
    HmmSpec spec;
    spec.horizon = 10;
    spec.trans_coef = 0.9;
    spec.trans_var = 0.2;
    spec.obs_var = 0.3;
    const HmmPath path = hmm_generate(spec, seed + static_cast<std::uint64_t>(i));
    const auto states = bootstrap_filter(spec, path.obs, 50,
                                         seed + static_cast<std::uint64_t>(i), i % 2 == 0);
    for (const FilterState& s : states) {
      if (s.belief.size() != 50) return "particle count changed at step " +
                                        std::to_string(s.step);
      for (const Atom& a : s.belief.atoms()) {
        if (!(a.weight > 0.0)) return "nonpositive weight at step " + std::to_string(s.step);
      }
    }
    return "";
  });
}

SuiteResult simulate_filter_mass_consistency(std::uint64_t seed) {
  Gen gen(seed);
  return run_suite("simulate.filter_mass_consistency", 20, [&](int i) -> std::string {
    HmmSpec spec;
    spec.horizon = 15;
    spec.trans_coef = 0.8;
    spec.trans_var = 0.3;
    spec.obs_var = 0.4;
    const HmmPath path = hmm_generate(spec, seed + static_cast<std::uint64_t>(i));
    const auto states = bootstrap_filter(spec, path.obs, 40,
                                         seed + static_cast<std::uint64_t>(i), false);
    // independent log-domain route: per-particle accumulated log factors,
    // combined by logsumexp, against the exported weight sum
    std::vector<double> cum(40, 0.0);
    for (const FilterState& s : states) {
      for (size_t j = 0; j < cum.size(); ++j) cum[j] += s.step_loglik[j];
      const double mx = *std::max_element(cum.begin(), cum.end());
      CompensatedSum acc;
      for (double c : cum) acc.add(std::exp(c - mx));
      const double log_total = mx + std::log(acc.value());
      const double direct = s.belief.total_mass();
      if (!close_rel(std::log(direct), log_total, 1e-9) &&
          !close_rel(direct, std::exp(log_total), 1e-9)) {
        return "step " + std::to_string(s.step) + ": " +
               describe(direct, std::exp(log_total));
      }
    }
    return "";
  });
}

SuiteResult simulate_dataset_determinism(std::uint64_t seed) {
  return run_suite("simulate.dataset_determinism", 3, [&](int i) -> std::string {
    const auto target = static_cast<TargetFunctional>(i % 4);
    const Dataset a = make_functional_dataset(target, 20, 1, 6, seed);
    const Dataset b = make_functional_dataset(target, 20, 1, 6, seed);
    for (size_t k = 0; k < a.size(); ++k) {
      if (format_record(a[k]) != format_record(b[k])) {
        return "record " + std::to_string(k) + " differs";
      }
    }
    HmmSpec r1;
    r1.regime_label = 0;
    HmmSpec r2;
    r2.trans_offset = 1.0;
    r2.regime_label = 1;
    const Dataset c = make_belief_dataset({r1, r2}, 3, 20, seed);
    const Dataset d = make_belief_dataset({r1, r2}, 3, 20, seed);
    for (size_t k = 0; k < c.size(); ++k) {
      if (format_record(c[k]) != format_record(d[k])) {
        return "belief record " + std::to_string(k) + " differs";
      }
    }
    return "";
  });
}

SuiteResult simulate_functional_mass_scaling(std::uint64_t seed) {
  Gen gen(seed);
  return run_suite("simulate.functional_mass_scaling", 200, [&](int) -> std::string {
    const auto mu = gen.measure_in_box(1);
    const double c = gen.uniform(0.2, 5.0);
    const auto scaled = mu.scaled(c);
    if (!close_rel(functional_value(TargetFunctional::normalized_mean, scaled),
                   functional_value(TargetFunctional::normalized_mean, mu), 1e-12)) {
      return "normalized_mean moved under scaling";
    }
    if (!close_rel(functional_value(TargetFunctional::normalized_variance, scaled),
                   functional_value(TargetFunctional::normalized_variance, mu), 1e-12)) {
      return "normalized_variance moved under scaling";
    }
    const double want_mass = std::atan(c * mu.total_mass());
    if (!close_rel(functional_value(TargetFunctional::arctan_mass, scaled), want_mass, 1e-12)) {
      return "arctan_mass off";
    }
    const double want_mixed =
        want_mass * functional_value(TargetFunctional::normalized_mean, mu);
    if (!close_rel(functional_value(TargetFunctional::mass_weighted_mean, scaled), want_mixed,
                   1e-11)) {
      return "mass_weighted_mean off";
    }
    return "";
  });
}

}  // namespace

std::vector<SuiteResult> run_verification(const VerifyOptions& options) {
  const std::uint64_t s = options.seed;
  std::vector<SuiteResult> results;
  results.push_back(measure_integrate_linearity(s + 1));
  results.push_back(measure_normalized_scale_invariance(s + 2));
  results.push_back(measure_total_mass_scaling(s + 3));
  results.push_back(measure_mgf_consistency(s + 4));
  results.push_back(measure_permutation_invariance(s + 5));
  results.push_back(testfn_boundedness(s + 6));
  results.push_back(testfn_gradient_fd(s + 7));
  results.push_back(testfn_product_consistency(s + 8));
  results.push_back(testfn_mass_channel_monotonic(s + 9));
  results.push_back(metrics_point_axioms(s + 10, options.sabotage_metric));
  results.push_back(metrics_measure_axioms(s + 11));
  results.push_back(metrics_scale_pair(s + 12));
  results.push_back(metrics_convergence_surrogate(s + 13));
  results.push_back(metrics_truncation_monotone(s + 14));
  results.push_back(nets_permutation_invariance(s + 15));
  results.push_back(nets_mass_scale_factorization(s + 16));
  results.push_back(nets_deep_sets_equivalence(s + 17));
  results.push_back(nets_determinism(s + 18));
  results.push_back(training_gradient_correctness(s + 19));
  results.push_back(training_gd_monotonic(s + 20));
  results.push_back(training_fit_determinism(s + 21));
  results.push_back(training_batch_order_invariance(s + 22));
  results.push_back(simulate_filter_invariants(s + 23));
  results.push_back(simulate_filter_mass_consistency(s + 24));
  results.push_back(simulate_dataset_determinism(s + 25));
  results.push_back(simulate_functional_mass_scaling(s + 26));
  return results;
}

}  // namespace tdnn

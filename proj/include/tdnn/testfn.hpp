#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace tdnn {

using Point = Eigen::VectorXd;

// Metric on the input space E. Bump functions need one; everything else is
// metric-free. An empty handle means Euclidean.
using PointMetric = std::function<double(const Point&, const Point&)>;

double euclidean_distance(const Point& a, const Point& b);

class TestFunction;

// x ↦ Π_i x_i^{d_i}, defined on [0,1]^D so it stays in [0,1].
struct Monomial {
  std::vector<int> powers;
};

// x ↦ e^{v·x}. The evaluation points v may be trained, mirroring learned
// moment-generating-function features.
struct ExpFeature {
  Point direction;
  bool trainable = false;
};

// x ↦ x_index (0-based coordinate projection).
struct Projection {
  int dim = 0;
  int index = 0;
};

// p ↦ max(0, 1 − k·d(p,q)). Continuous, valued in [0,1], supported on the
// ball of radius 1/k around q.
struct Bump {
  Point center;
  double scale = 1.0;
  bool trainable = false;
  PointMetric metric;  // empty ⇒ Euclidean
};

struct ProductNode {
  std::shared_ptr<const TestFunction> left;
  std::shared_ptr<const TestFunction> right;
};

// One member of a test-function family. Value semantics; evaluation is pure.
// Trainable parameters (ExpFeature directions, Bump center/scale) are exposed
// through the params()/set_params()/param_grad() triple so the training
// engine can treat every variant uniformly.
class TestFunction {
 public:
  using Variant = std::variant<Monomial, ExpFeature, Projection, Bump, ProductNode>;

  static TestFunction monomial(std::vector<int> powers);
  static TestFunction constant_one(int dim);  // all-zero powers
  static TestFunction exp_feature(Point direction, bool trainable = false);
  static TestFunction projection(int dim, int index);
  static TestFunction bump(Point center, double scale, bool trainable = false,
                           PointMetric metric = {});
  static TestFunction product_of(TestFunction left, TestFunction right);

  int dim() const;
  double operator()(const Point& p) const { return eval(p); }
  double eval(const Point& p) const;

  bool trainable() const;
  int param_count() const;
  Eigen::VectorXd params() const;
  void set_params(const Eigen::VectorXd& theta);
  // d eval(p) / d params, laid out like params(). Subgradient 0 at the bump
  // kink and at d(p,q)=0.
  Eigen::VectorXd param_grad(const Point& p) const;

  const Variant& node() const { return node_; }
  std::string kind() const;

 private:
  explicit TestFunction(Variant node) : node_(std::move(node)) {}
  Variant node_;
};

// Multiplication with fusion: monomial×monomial adds exponents,
// exp×exp sums directions, anything else becomes a product node.
TestFunction product(const TestFunction& a, const TestFunction& b);

// The mass channel g0: bounded, continuous, strictly monotone on (0,∞).
// Defaults to arctan. A custom channel keeps the contract but is not
// serializable.
struct MassChannel {
  std::string name = "arctan";
  std::function<double(double)> fn;  // empty ⇒ arctan

  double operator()(double mass) const;
};

enum class FamilyKind { monomial, exp, projection, bump };

struct FamilySpec {
  FamilyKind family = FamilyKind::monomial;
  int dim = 1;
  bool trainable = false;        // exp / bump members only
  Eigen::MatrixXd exp_basis;     // exp family: D×D column basis; empty ⇒ identity
};

FamilyKind family_kind_from_name(const std::string& name);
std::string family_kind_name(FamilyKind kind);

// First `count` non-constant members of the family, in a fixed documented
// order (the constant function is the family's index-1 member and is carried
// by the mass channel, so it is skipped here).
//
//   monomial:   exponent tuples ordered by total degree, then max exponent,
//               then exponent tuple (descending), e.g. D=2:
//               x1, x2, x1·x2, x1², x2², x1²·x2, ...
//   exp:        e^{v·x} with v = basis · d, d running through the monomial
//               exponent order (closure under multiplication is v-addition)
//   projection: π_1, ..., π_D (count ≤ D)
//   bump:       levels k = 1, 2, ...; centers on the uniform grid over
//               [0,1]^D with spacing 1/k, lexicographic
std::vector<TestFunction> enumerate_family(const FamilySpec& spec, int count);

}  // namespace tdnn

#include "tdnn/testfn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tdnn {

double euclidean_distance(const Point& a, const Point& b) {
  return (a - b).norm();
}

namespace {

void check_dim(int expected, const Point& p, const char* what) {
  if (p.size() != expected) {
    throw std::invalid_argument(std::string(what) + ": point dimension " +
                                std::to_string(p.size()) + " does not match " +
                                std::to_string(expected));
  }
}

double bump_distance(const Bump& b, const Point& p) {
  return b.metric ? b.metric(p, b.center) : euclidean_distance(p, b.center);
}

}  // namespace

TestFunction TestFunction::monomial(std::vector<int> powers) {
  if (powers.empty()) throw std::invalid_argument("monomial: empty power tuple");
  for (int d : powers) {
    if (d < 0) throw std::invalid_argument("monomial: negative exponent");
  }
  return TestFunction(Monomial{std::move(powers)});
}

TestFunction TestFunction::constant_one(int dim) {
  return monomial(std::vector<int>(static_cast<size_t>(dim), 0));
}

TestFunction TestFunction::exp_feature(Point direction, bool trainable) {
  if (direction.size() == 0) throw std::invalid_argument("exp_feature: empty direction");
  return TestFunction(ExpFeature{std::move(direction), trainable});
}

TestFunction TestFunction::projection(int dim, int index) {
  if (dim < 1 || index < 0 || index >= dim) {
    throw std::invalid_argument("projection: index out of range");
  }
  return TestFunction(Projection{dim, index});
}

TestFunction TestFunction::bump(Point center, double scale, bool trainable,
                                PointMetric metric) {
  if (center.size() == 0) throw std::invalid_argument("bump: empty center");
  if (!(scale > 0.0)) throw std::invalid_argument("bump: scale must be positive");
  return TestFunction(Bump{std::move(center), scale, trainable, std::move(metric)});
}

TestFunction TestFunction::product_of(TestFunction left, TestFunction right) {
  if (left.dim() != right.dim()) {
    throw std::invalid_argument("product: operand dimensions differ");
  }
  return TestFunction(ProductNode{
      std::make_shared<const TestFunction>(std::move(left)),
      std::make_shared<const TestFunction>(std::move(right))});
}

int TestFunction::dim() const {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Monomial>) {
          return static_cast<int>(n.powers.size());
        } else if constexpr (std::is_same_v<T, ExpFeature>) {
          return static_cast<int>(n.direction.size());
        } else if constexpr (std::is_same_v<T, Projection>) {
          return n.dim;
        } else if constexpr (std::is_same_v<T, Bump>) {
          return static_cast<int>(n.center.size());
        } else {
          return n.left->dim();
        }
      },
      node_);
}

double TestFunction::eval(const Point& p) const {
  return std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Monomial>) {
          check_dim(static_cast<int>(n.powers.size()), p, "monomial");
          double v = 1.0;
          for (size_t i = 0; i < n.powers.size(); ++i) {
            const double x = p(static_cast<Eigen::Index>(i));
            if (x < 0.0 || x > 1.0) {
              throw std::domain_error("monomial: coordinate outside [0,1]");
            }
            v *= std::pow(x, n.powers[i]);
          }
          return v;
        } else if constexpr (std::is_same_v<T, ExpFeature>) {
          check_dim(static_cast<int>(n.direction.size()), p, "exp_feature");
          return std::exp(n.direction.dot(p));
        } else if constexpr (std::is_same_v<T, Projection>) {
          check_dim(n.dim, p, "projection");
          return p(n.index);
        } else if constexpr (std::is_same_v<T, Bump>) {
          check_dim(static_cast<int>(n.center.size()), p, "bump");
          return std::max(0.0, 1.0 - n.scale * bump_distance(n, p));
        } else {
          return n.left->eval(p) * n.right->eval(p);
        }
      },
      node_);
}

bool TestFunction::trainable() const {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExpFeature>) {
          return n.trainable;
        } else if constexpr (std::is_same_v<T, Bump>) {
          return n.trainable;
        } else if constexpr (std::is_same_v<T, ProductNode>) {
          return n.left->trainable() || n.right->trainable();
        } else {
          return false;
        }
      },
      node_);
}

int TestFunction::param_count() const {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExpFeature>) {
          return n.trainable ? static_cast<int>(n.direction.size()) : 0;
        } else if constexpr (std::is_same_v<T, Bump>) {
          return n.trainable ? static_cast<int>(n.center.size()) + 1 : 0;
        } else if constexpr (std::is_same_v<T, ProductNode>) {
          return n.left->param_count() + n.right->param_count();
        } else {
          return 0;
        }
      },
      node_);
}

Eigen::VectorXd TestFunction::params() const {
  Eigen::VectorXd out(param_count());
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExpFeature>) {
          if (n.trainable) out = n.direction;
        } else if constexpr (std::is_same_v<T, Bump>) {
          if (n.trainable) {
            out.head(n.center.size()) = n.center;
            out(n.center.size()) = n.scale;
          }
        } else if constexpr (std::is_same_v<T, ProductNode>) {
          const int nl = n.left->param_count();
          out.head(nl) = n.left->params();
          out.tail(out.size() - nl) = n.right->params();
        }
      },
      node_);
  return out;
}

void TestFunction::set_params(const Eigen::VectorXd& theta) {
  if (theta.size() != param_count()) {
    throw std::invalid_argument("set_params: wrong parameter count");
  }
  std::visit(
      [&](auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExpFeature>) {
          if (n.trainable) n.direction = theta;
        } else if constexpr (std::is_same_v<T, Bump>) {
          if (n.trainable) {
            n.center = theta.head(n.center.size());
            const double k = theta(n.center.size());
            if (!(k > 0.0)) throw std::invalid_argument("set_params: bump scale must stay positive");
            n.scale = k;
          }
        } else if constexpr (std::is_same_v<T, ProductNode>) {
          TestFunction left = *n.left;
          TestFunction right = *n.right;
          const int nl = left.param_count();
          left.set_params(theta.head(nl));
          right.set_params(theta.tail(theta.size() - nl));
          n.left = std::make_shared<const TestFunction>(std::move(left));
          n.right = std::make_shared<const TestFunction>(std::move(right));
        }
      },
      node_);
}

Eigen::VectorXd TestFunction::param_grad(const Point& p) const {
  if (!trainable()) {
    throw std::logic_error("param_grad: test function has no trainable parameters");
  }
  return std::visit(
      [&](const auto& n) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExpFeature>) {
          check_dim(static_cast<int>(n.direction.size()), p, "exp_feature");
          return p * std::exp(n.direction.dot(p));
        } else if constexpr (std::is_same_v<T, Bump>) {
          check_dim(static_cast<int>(n.center.size()), p, "bump");
          if (n.metric) {
            throw std::invalid_argument(
                "param_grad: bump gradients are defined for the Euclidean metric only");
          }
          const Eigen::Index D = n.center.size();
          Eigen::VectorXd g = Eigen::VectorXd::Zero(D + 1);
          const double d = euclidean_distance(p, n.center);
          const double margin = 1.0 - n.scale * d;
          // subgradient 0 at the kink (margin == 0) and at d == 0
          if (margin > 0.0 && d > 0.0) {
            g.head(D) = -n.scale / d * (n.center - p);
            g(D) = -d;
          }
          return g;
        } else if constexpr (std::is_same_v<T, ProductNode>) {
          const double lv = n.left->eval(p);
          const double rv = n.right->eval(p);
          Eigen::VectorXd g(n.left->param_count() + n.right->param_count());
          if (n.left->param_count() > 0) {
            g.head(n.left->param_count()) = rv * n.left->param_grad(p);
          }
          if (n.right->param_count() > 0) {
            g.tail(n.right->param_count()) = lv * n.right->param_grad(p);
          }
          return g;
        } else {
          throw std::logic_error("param_grad: unreachable");
        }
      },
      node_);
}

std::string TestFunction::kind() const {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Monomial>) return "monomial";
        else if constexpr (std::is_same_v<T, ExpFeature>) return "exp";
        else if constexpr (std::is_same_v<T, Projection>) return "projection";
        else if constexpr (std::is_same_v<T, Bump>) return "bump";
        else return "product";
      },
      node_);
}

TestFunction product(const TestFunction& a, const TestFunction& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("product: operand dimensions differ");
  }
  if (const auto* ma = std::get_if<Monomial>(&a.node())) {
    if (const auto* mb = std::get_if<Monomial>(&b.node())) {
      std::vector<int> powers(ma->powers.size());
      for (size_t i = 0; i < powers.size(); ++i) powers[i] = ma->powers[i] + mb->powers[i];
      return TestFunction::monomial(std::move(powers));
    }
  }
  if (const auto* ea = std::get_if<ExpFeature>(&a.node())) {
    if (const auto* eb = std::get_if<ExpFeature>(&b.node())) {
      return TestFunction::exp_feature(ea->direction + eb->direction,
                                       ea->trainable || eb->trainable);
    }
  }
  return TestFunction::product_of(a, b);
}

double MassChannel::operator()(double mass) const {
  return fn ? fn(mass) : std::atan(mass);
}

FamilyKind family_kind_from_name(const std::string& name) {
  if (name == "monomial") return FamilyKind::monomial;
  if (name == "exp") return FamilyKind::exp;
  if (name == "projection") return FamilyKind::projection;
  if (name == "bump") return FamilyKind::bump;
  throw std::invalid_argument("unsupported family: " + name);
}

std::string family_kind_name(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::monomial: return "monomial";
    case FamilyKind::exp: return "exp";
    case FamilyKind::projection: return "projection";
    case FamilyKind::bump: return "bump";
  }
  throw std::logic_error("family_kind_name: bad enum");
}

namespace {

// Exponent tuples of ℕ_0^D \ {0} in the documented order: total degree
// ascending, then max exponent ascending, then tuple descending (so x1
// precedes x2 and x1·x2 precedes x1² in two dimensions).
std::vector<std::vector<int>> exponent_tuples(int dim, int count) {
  std::vector<std::vector<int>> out;
  for (int degree = 1; static_cast<int>(out.size()) < count; ++degree) {
    std::vector<std::vector<int>> level;
    std::vector<int> current(static_cast<size_t>(dim), 0);
    // enumerate all compositions of `degree` into dim nonnegative parts
    std::function<void(int, int)> rec = [&](int pos, int remaining) {
      if (pos == dim - 1) {
        current[static_cast<size_t>(pos)] = remaining;
        level.push_back(current);
        return;
      }
      for (int v = 0; v <= remaining; ++v) {
        current[static_cast<size_t>(pos)] = v;
        rec(pos + 1, remaining - v);
      }
    };
    rec(0, degree);
    std::sort(level.begin(), level.end(), [](const auto& a, const auto& b) {
      const int ma = *std::max_element(a.begin(), a.end());
      const int mb = *std::max_element(b.begin(), b.end());
      if (ma != mb) return ma < mb;
      return a > b;  // descending tuple: lower variable indices first
    });
    for (auto& t : level) {
      out.push_back(std::move(t));
      if (static_cast<int>(out.size()) == count) break;
    }
  }
  return out;
}

}  // namespace

std::vector<TestFunction> enumerate_family(const FamilySpec& spec, int count) {
  if (count < 1) throw std::invalid_argument("enumerate_family: count must be >= 1");
  if (spec.dim < 1) throw std::invalid_argument("enumerate_family: dim must be >= 1");
  std::vector<TestFunction> out;
  out.reserve(static_cast<size_t>(count));
  switch (spec.family) {
    case FamilyKind::monomial: {
      for (auto& t : exponent_tuples(spec.dim, count)) {
        out.push_back(TestFunction::monomial(std::move(t)));
      }
      break;
    }
    case FamilyKind::exp: {
      Eigen::MatrixXd basis = spec.exp_basis;
      if (basis.size() == 0) {
        basis = Eigen::MatrixXd::Identity(spec.dim, spec.dim);
      }
      if (basis.rows() != spec.dim || basis.cols() != spec.dim) {
        throw std::invalid_argument("enumerate_family: exp basis must be D×D");
      }
      for (const auto& t : exponent_tuples(spec.dim, count)) {
        Eigen::VectorXd d(spec.dim);
        for (int i = 0; i < spec.dim; ++i) d(i) = t[static_cast<size_t>(i)];
        out.push_back(TestFunction::exp_feature(basis * d, spec.trainable));
      }
      break;
    }
    case FamilyKind::projection: {
      if (count > spec.dim) {
        throw std::invalid_argument("enumerate_family: projection family has only D members");
      }
      for (int i = 0; i < count; ++i) out.push_back(TestFunction::projection(spec.dim, i));
      break;
    }
    case FamilyKind::bump: {
      for (int level = 1; static_cast<int>(out.size()) < count; ++level) {
        const int per_axis = level + 1;
        std::vector<int> idx(static_cast<size_t>(spec.dim), 0);
        while (true) {
          Point q(spec.dim);
          for (int i = 0; i < spec.dim; ++i) {
            q(i) = static_cast<double>(idx[static_cast<size_t>(i)]) / level;
          }
          out.push_back(TestFunction::bump(q, static_cast<double>(level), spec.trainable));
          if (static_cast<int>(out.size()) == count) return out;
          int pos = spec.dim - 1;
          while (pos >= 0 && ++idx[static_cast<size_t>(pos)] == per_axis) {
            idx[static_cast<size_t>(pos)] = 0;
            --pos;
          }
          if (pos < 0) break;
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace tdnn

#include "qdpd/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qdpd/errors.hpp"

namespace qdpd {

namespace {

void require_dim(const Eigen::Ref<const Eigen::VectorXd>& x, int n) {
  if (x.size() != n) {
    throw ShapeError("cost expects dimension " + std::to_string(n) + ", got " +
                     std::to_string(x.size()));
  }
}

bool all_finite(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return v.allFinite();
}

}  // namespace

PiecewiseQuadCost::PiecewiseQuadCost(PiecewiseQuadCoefficients k) : k_(k) {
  if (!(k.a >= 0 && k.b >= 0 && k.c >= 0 && k.d >= 0) ||
      !std::isfinite(k.a + k.b + k.c + k.d)) {
    throw DomainError("piecewise-quadratic coefficients must be finite and nonnegative");
  }
}

double PiecewiseQuadCost::value(double x) const {
  if (x >= k_.b) return k_.a * (x - k_.b) * (x - k_.b);
  if (x <= -k_.d) return k_.c * (x + k_.d) * (x + k_.d);
  return 0.0;
}

double PiecewiseQuadCost::gradient(double x) const {
  if (x >= k_.b) return 2.0 * k_.a * (x - k_.b);
  if (x <= -k_.d) return 2.0 * k_.c * (x + k_.d);
  return 0.0;
}

double PiecewiseQuadCost::value(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  require_dim(x, 1);
  return value(x[0]);
}

void PiecewiseQuadCost::gradient(const Eigen::Ref<const Eigen::VectorXd>& x,
                                 Eigen::Ref<Eigen::VectorXd> out) const {
  require_dim(x, 1);
  out[0] = gradient(x[0]);
}

double PiecewiseQuadCost::smoothness() const {
  return 2.0 * std::max(k_.a, k_.c);
}

DiagonalQuadraticCost::DiagonalQuadraticCost(Eigen::VectorXd weights,
                                             Eigen::VectorXd centers)
    : weights_(std::move(weights)), centers_(std::move(centers)) {
  if (weights_.size() == 0 || weights_.size() != centers_.size()) {
    throw ShapeError("quadratic cost needs matching non-empty weights and centers");
  }
  if ((weights_.array() < 0).any() || !weights_.allFinite() ||
      !centers_.allFinite()) {
    throw DomainError("quadratic weights must be finite and nonnegative");
  }
}

double DiagonalQuadraticCost::value(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  require_dim(x, dimension());
  return (weights_.array() * (x - centers_).array().square()).sum();
}

void DiagonalQuadraticCost::gradient(const Eigen::Ref<const Eigen::VectorXd>& x,
                                     Eigen::Ref<Eigen::VectorXd> out) const {
  require_dim(x, dimension());
  out = 2.0 * weights_.cwiseProduct(x - centers_);
}

double DiagonalQuadraticCost::smoothness() const {
  return 2.0 * weights_.maxCoeff();
}

GlobalProblem::GlobalProblem(std::vector<std::shared_ptr<const LocalCost>> costs)
    : costs_(std::move(costs)) {
  if (costs_.empty()) throw ShapeError("problem needs at least one local cost");
  dimension_ = costs_.front()->dimension();
  for (const auto& c : costs_) {
    if (!c) throw ShapeError("null local cost");
    if (c->dimension() != dimension_) {
      throw ShapeError("local costs disagree on dimension");
    }
  }
}

double GlobalProblem::smoothness() const {
  double m = 0.0;
  for (const auto& c : costs_) m += c->smoothness();
  return m;
}

double GlobalProblem::value_common(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double v = 0.0;
  for (const auto& c : costs_) v += c->value(x);
  return v;
}

Eigen::VectorXd GlobalProblem::gradient_common(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dimension_);
  Eigen::VectorXd gi(dimension_);
  for (const auto& c : costs_) {
    c->gradient(x, gi);
    g += gi;
  }
  return g;
}

double GlobalProblem::value_stacked(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != agent_count() * dimension_) {
    throw ShapeError("stacked vector has wrong length");
  }
  double v = 0.0;
  for (int i = 0; i < agent_count(); ++i) {
    v += costs_[i]->value(x.segment(i * dimension_, dimension_));
  }
  return v;
}

Eigen::VectorXd GlobalProblem::gradient_stacked(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != agent_count() * dimension_) {
    throw ShapeError("stacked vector has wrong length");
  }
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < agent_count(); ++i) {
    costs_[i]->gradient(x.segment(i * dimension_, dimension_),
                        g.segment(i * dimension_, dimension_));
  }
  return g;
}

const std::array<PiecewiseQuadCoefficients, 12>& table1_coefficients() {
  static const std::array<PiecewiseQuadCoefficients, 12> rows{{
      {0.1, 0.5, 1.0, 9.0},
      {0.3, 0.2, 3.0, 3.0},
      {0.8, 0.5, 3.0, 7.0},
      {0.0, 0.6, 7.0, 2.0},
      {0.9, 0.7, 1.0, 0.0},
      {0.7, 0.4, 7.0, 7.0},
      {0.5, 0.4, 1.0, 5.0},
      {0.6, 1.0, 7.0, 5.0},
      {0.2, 0.0, 5.0, 9.0},
      {0.5, 0.9, 8.0, 6.0},
      {1.0, 0.9, 7.0, 6.0},
      {0.5, 0.8, 9.0, 9.0},
  }};
  return rows;
}

GlobalProblem piecewise_problem(const std::vector<PiecewiseQuadCoefficients>& rows) {
  std::vector<std::shared_ptr<const LocalCost>> costs;
  costs.reserve(rows.size());
  for (const auto& r : rows) costs.push_back(std::make_shared<PiecewiseQuadCost>(r));
  return GlobalProblem(std::move(costs));
}

GlobalProblem table1_problem() {
  const auto& rows = table1_coefficients();
  return piecewise_problem({rows.begin(), rows.end()});
}

Eigen::VectorXd CentralizedSolution::project(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return x.cwiseMax(set_lower).cwiseMin(set_upper);
}

double CentralizedSolution::distance(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return (x - project(x)).norm();
}

namespace {

double scalar_gradient(const GlobalProblem& p, double x) {
  Eigen::VectorXd v(1);
  v[0] = x;
  const double g = p.gradient_common(v)[0];
  if (!std::isfinite(g)) {
    throw DomainError("non-finite gradient at x = " + std::to_string(x));
  }
  return g;
}

// Boundary between {g < 0} (at `neg`) and {g >= 0} (at `nonneg`), or between
// {g <= 0} and {g > 0} when `strict_right` is set.
double bisect_sign_change(const GlobalProblem& p, double left, double right,
                          bool strict_right, double tol) {
  auto right_side = [&](double x) {
    const double g = scalar_gradient(p, x);
    return strict_right ? g > 0.0 : g >= 0.0;
  };
  for (int it = 0; it < 4000 && right - left > tol; ++it) {
    const double mid = 0.5 * (left + right);
    if (mid <= left || mid >= right) break;
    (right_side(mid) ? right : left) = mid;
  }
  return right;
}

CentralizedSolution solve_scalar(const GlobalProblem& p, double tol) {
  constexpr double kMaxBracket = 1e12;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Smallest R with g(-R) < 0 and with g(R) > 0.
  double neg_point = kInf, pos_point = kInf;
  for (double r = 1.0; r <= kMaxBracket; r *= 2.0) {
    if (!std::isfinite(neg_point) && scalar_gradient(p, -r) < 0.0) neg_point = -r;
    if (!std::isfinite(pos_point) && scalar_gradient(p, r) > 0.0) pos_point = r;
    if (std::isfinite(neg_point) && std::isfinite(pos_point)) break;
  }

  if (!std::isfinite(pos_point) && scalar_gradient(p, kMaxBracket) < 0.0) {
    throw DomainError("objective decreases without bound (no minimizer bracket)");
  }
  if (!std::isfinite(neg_point) && scalar_gradient(p, -kMaxBracket) > 0.0) {
    throw DomainError("objective decreases without bound (no minimizer bracket)");
  }

  double lo = -kInf, hi = kInf;
  if (std::isfinite(neg_point)) {
    const double right = std::isfinite(pos_point) ? pos_point : kMaxBracket;
    lo = bisect_sign_change(p, neg_point, right, false, tol);
  }
  if (std::isfinite(pos_point)) {
    const double left = std::isfinite(neg_point) ? neg_point : -kMaxBracket;
    hi = bisect_sign_change(p, left, pos_point, true, tol);
  }
  if (lo > hi) lo = hi = 0.5 * (lo + hi);  // isolated minimizer, bisection noise

  CentralizedSolution s;
  s.set_lower = Eigen::VectorXd::Constant(1, lo);
  s.set_upper = Eigen::VectorXd::Constant(1, hi);
  s.x_star = Eigen::VectorXd::Constant(1, std::clamp(0.0, lo, hi));
  return s;
}

CentralizedSolution solve_descent(const GlobalProblem& p, double tol) {
  const double m_f = p.smoothness();
  if (!(m_f > 0)) throw DomainError("gradient descent needs m_f > 0");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(p.dimension());
  constexpr long kMaxIter = 10'000'000;
  for (long it = 0; it < kMaxIter; ++it) {
    const Eigen::VectorXd g = p.gradient_common(x);
    if (!all_finite(g)) throw DomainError("non-finite gradient in descent");
    if (g.norm() <= tol) {
      CentralizedSolution s;
      s.x_star = x;
      s.set_lower = x;
      s.set_upper = x;
      return s;
    }
    x -= g / m_f;
  }
  throw DomainError("gradient descent did not reach tolerance");
}

}  // namespace

CentralizedSolution solve_centralized(const GlobalProblem& problem, double tol) {
  if (!(tol > 0)) throw DomainError("solve_centralized: tol must be positive");
  CentralizedSolution s = problem.dimension() == 1 ? solve_scalar(problem, tol)
                                                   : solve_descent(problem, tol);
  s.optimal_value = problem.value_common(s.x_star);
  if (!std::isfinite(s.optimal_value)) {
    throw DomainError("non-finite cost value at the minimizer");
  }
  s.gradient_norm = problem.gradient_common(s.x_star).norm();
  s.M1 = s.x_star.lpNorm<Eigen::Infinity>();
  Eigen::VectorXd gi(problem.dimension());
  for (int i = 0; i < problem.agent_count(); ++i) {
    problem.cost(i).gradient(s.x_star, gi);
    s.M2 = std::max(s.M2, gi.lpNorm<Eigen::Infinity>());
  }
  return s;
}

}  // namespace qdpd

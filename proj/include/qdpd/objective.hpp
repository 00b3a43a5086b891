#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace qdpd {

// A differentiable convex local cost f_i : R^n -> R with an m_i-Lipschitz
// gradient. Implementations are immutable.
class LocalCost {
 public:
  virtual ~LocalCost() = default;
  virtual int dimension() const = 0;
  virtual double value(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;
  virtual void gradient(const Eigen::Ref<const Eigen::VectorXd>& x,
                        Eigen::Ref<Eigen::VectorXd> out) const = 0;
  /// Lipschitz constant m_i of the gradient.
  virtual double smoothness() const = 0;
};

/// Coefficients of one scalar piecewise-quadratic cost
/// f(x) = a (x-b)^2 for x >= b, c (x+d)^2 for x <= -d, 0 in between.
struct PiecewiseQuadCoefficients {
  double a;
  double b;
  double c;
  double d;
};

class PiecewiseQuadCost final : public LocalCost {
 public:
  explicit PiecewiseQuadCost(PiecewiseQuadCoefficients k);

  const PiecewiseQuadCoefficients& coefficients() const { return k_; }

  double value(double x) const;
  double gradient(double x) const;

  int dimension() const override { return 1; }
  double value(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  void gradient(const Eigen::Ref<const Eigen::VectorXd>& x,
                Eigen::Ref<Eigen::VectorXd> out) const override;
  /// 2 max(a, c).
  double smoothness() const override;

 private:
  PiecewiseQuadCoefficients k_;
};

/// f(x) = sum_k w_k (x_k - c_k)^2 with w_k >= 0.
class DiagonalQuadraticCost final : public LocalCost {
 public:
  DiagonalQuadraticCost(Eigen::VectorXd weights, Eigen::VectorXd centers);

  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& centers() const { return centers_; }

  int dimension() const override { return static_cast<int>(weights_.size()); }
  double value(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  void gradient(const Eigen::Ref<const Eigen::VectorXd>& x,
                Eigen::Ref<Eigen::VectorXd> out) const override;
  double smoothness() const override;

 private:
  Eigen::VectorXd weights_;
  Eigen::VectorXd centers_;
};

// f(x) = sum_i f_i(x). "Common" evaluations take a single n-vector shared by
// all agents; "stacked" ones take N blocks, block i fed to f_i.
class GlobalProblem {
 public:
  explicit GlobalProblem(std::vector<std::shared_ptr<const LocalCost>> costs);

  int agent_count() const { return static_cast<int>(costs_.size()); }
  int dimension() const { return dimension_; }
  const LocalCost& cost(int i) const { return *costs_.at(i); }
  /// m_f = sum_i m_i.
  double smoothness() const;

  double value_common(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd gradient_common(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double value_stacked(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd gradient_stacked(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  std::vector<std::shared_ptr<const LocalCost>> costs_;
  int dimension_;
};

/// The twelve rows of the regression training set, in agent order.
const std::array<PiecewiseQuadCoefficients, 12>& table1_coefficients();
GlobalProblem table1_problem();
GlobalProblem piecewise_problem(const std::vector<PiecewiseQuadCoefficients>& rows);

struct CentralizedSolution {
  Eigen::VectorXd x_star;
  /// Per-coordinate bounds of the minimizer set (a box; equal to x_star when
  /// the minimizer is isolated or n > 1).
  Eigen::VectorXd set_lower;
  Eigen::VectorXd set_upper;
  double optimal_value = 0.0;
  double gradient_norm = 0.0;
  double M1 = 0.0;  ///< ||x*||_inf
  double M2 = 0.0;  ///< max_i ||grad f_i(x*)||_inf

  /// Nearest point of the minimizer set to x (n-vector).
  Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Distance from x to the minimizer set.
  double distance(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Reference minimizer of sum_i f_i. Scalar problems use gradient-sign
/// bisection and recover the whole minimizer interval; higher dimensions run
/// gradient descent with step 1/m_f until ||grad f|| <= tol.
CentralizedSolution solve_centralized(const GlobalProblem& problem,
                                      double tol = 1e-12);

}  // namespace qdpd

#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qdpd/dynamics.hpp"
#include "qdpd/graph.hpp"
#include "qdpd/objective.hpp"
#include "qdpd/params.hpp"

namespace qdpd {

struct KktResidual {
  double stationarity = 0.0;  ///< ‖∇f(x) + L x + L λ‖
  double consensus = 0.0;     ///< ‖L x‖
  double total = 0.0;         ///< ‖F(z)‖
};

/// F(z) = [∇f(x) + L x + L λ; −L x] on stacked z = [x; λ].
KktResidual kkt_residual(const GlobalProblem& problem, const NetworkGraph& graph,
                         const Eigen::Ref<const Eigen::VectorXd>& z);

/// Primal-dual reference point z* = [1 ⊗ x*; λ*].
struct PrimalDualReference {
  Eigen::VectorXd z_star;
  double f_star = 0.0;            ///< f(x*) summed over agents
  double residual = 0.0;          ///< ‖L λ* + ∇f(1 ⊗ x*) + L(1 ⊗ x*)‖
  double lambda_norm = 0.0;       ///< ‖λ*‖
  double lambda_bound = 0.0;      ///< 1ᵀλ(0)/√(Nn) + √(Nn)(M₁/σ₂ + M₂)
  bool bound_holds = false;
};

/// λ* from the first KKT block by minimum-norm least squares, then shifted so
/// its consensus component matches 1ᵀλ(0) coordinatewise. Throws KktError when
/// the least-squares residual exceeds `tol`.
PrimalDualReference dual_reference(const GlobalProblem& problem,
                                   const NetworkGraph& graph,
                                   const CentralizedSolution& solution,
                                   const Eigen::Ref<const Eigen::VectorXd>& lambda0,
                                   double tol = 1e-8);

/// V(z) = 4σ_N · ½‖z − z*‖² + f(x) − f* + ½ xᵀ L x + λᵀ L x.
double lyapunov(const GlobalProblem& problem, const NetworkGraph& graph,
                const Eigen::Ref<const Eigen::VectorXd>& z,
                const PrimalDualReference& ref);

/// Sandwich constants (3σ_N/2, (m_f + 6σ_N)/2).
std::pair<double, double> lyapunov_bounds(const GlobalProblem& problem,
                                          const NetworkGraph& graph);

struct Envelope {
  double a0 = 0.0;     ///< (m_f + 6σ_N)/2 · M₀²
  double b0 = 0.0;     ///< M₀/(κσ_N) · √(radicand/(12σ_N + 33))
  double rate = 0.0;   ///< αη
  double period = 0.0;

  double a(double t) const;
  /// Piecewise constant: b0 e^{−(rate/2)(⌊t/T⌋ + 1)T}.
  double b(double t) const;
};

/// Envelopes for a derived-mode set; std::nullopt when κ or M₀ is unknown.
std::optional<Envelope> envelopes(const ParameterSet& p);

struct DiagnosticSample {
  double t = 0.0;
  double F_norm = 0.0;
  double V = 0.0;
  double e_norm = 0.0;
  double consensus_residual = 0.0;
  double dual_sum = 0.0;
  double tracking_error = 0.0;
  double J = 0.0;
};

/// Stacked set-distance sqrt(Σ_i d(x_i, X*)²).
double tracking_error(const CentralizedSolution& solution,
                      const Eigen::Ref<const Eigen::VectorXd>& x, int n);
/// max_i d(x_i, X*).
double max_agent_distance(const CentralizedSolution& solution,
                          const Eigen::Ref<const Eigen::VectorXd>& x, int n);

std::vector<DiagnosticSample> diagnose(const GlobalProblem& problem,
                                       const NetworkGraph& graph,
                                       const TrajectoryRecord& trajectory,
                                       const CentralizedSolution& solution,
                                       const PrimalDualReference& ref);

struct EnvelopeReport {
  int V_violations = 0;
  int e_violations = 0;
  int samples = 0;
};

EnvelopeReport check_envelopes(const Envelope& env,
                               const std::vector<DiagnosticSample>& diagnostics);

struct RateFit {
  double exponent = 0.0;   ///< decay rate r in err ≈ C e^{−r t}
  double intercept = 0.0;  ///< ln C
  double residual = 0.0;   ///< RMS of the log-linear fit
  int points = 0;
};

/// Least-squares slope of ln(err) against t over [t1, t2]. Points are taken
/// until the error first drops to 1e2 times the numerical floor of the series.
/// std::nullopt signals an undetermined rate (fewer than three usable points).
std::optional<RateFit> fit_rate(const std::vector<double>& t,
                                const std::vector<double>& err, double t1, double t2);

/// Fit over the tracking error of a run; default window [0.2 t_end, t_end].
std::optional<RateFit> fit_rate(const TrajectoryRecord& trajectory,
                                const CentralizedSolution& solution,
                                std::optional<double> t1 = std::nullopt,
                                std::optional<double> t2 = std::nullopt);

/// After smoothing by block maxima of `block` consecutive samples, is the
/// series nonincreasing block to block?
bool smoothed_nonincreasing(const std::vector<double>& series, std::size_t block);

}  // namespace qdpd

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdpd/codec.hpp"
#include "qdpd/dynamics.hpp"
#include "qdpd/graph.hpp"
#include "qdpd/objective.hpp"
#include "qdpd/quantizer.hpp"

namespace qdpd {

/// Problem and topology constants that feed every parameter formula.
struct ProblemData {
  int N = 0;
  int n = 0;
  double m_f = 0.0;
  double sigma2 = 0.0;
  double sigmaN = 0.0;
  double M1 = 0.0;
  double M2 = 0.0;
};

ProblemData describe(const GlobalProblem& problem, const NetworkGraph& graph,
                     const CentralizedSolution& solution);

enum class ParameterMode { Manual, Derived };

struct ParameterSet {
  ParameterMode mode = ParameterMode::Manual;
  ProblemData problem;

  double T = 0.0;
  int L = 1;
  double l0 = 0.0;
  double decay_per_step = 0.0;  ///< α (η/2) T in derived mode
  double alpha = 1.0;

  std::optional<double> eta;
  std::optional<double> kappa;
  std::optional<double> beta;
  std::optional<double> c1;
  std::optional<double> c2;
  std::optional<double> rho;
  std::optional<double> rho0;
  std::optional<double> M;
  std::optional<double> Mprime;
  std::optional<double> M0;

  std::vector<std::string> notes;  ///< non-fatal observations made during derivation

  QuantizerSpec quantizer() const { return QuantizerSpec(L); }
  LengthSchedule schedule() const { return LengthSchedule(l0, decay_per_step, T); }
  Scheme scheme() const { return {quantizer(), schedule()}; }
};

/// sqrt((3 + sqrt 5) / 2) σ_N.
double sigma_bar(double sigmaN);

/// η = β / (κ² (m_f + 6σ_N)).
double derive_eta(double beta, double kappa, double m_f, double sigmaN);

/// √2 (6σ_N + 2m_f) κ √((m_f+4σ_N)(4σ_N+11)) / (η √(3+√5) √(σ_N − σ_N κ²(η+4)(m_f+4σ_N))).
/// Throws InfeasibleParameters when the last radicand is not positive.
double derive_rho(double eta, double kappa, double m_f, double sigmaN);

/// Radicand 3 − κ²(3η+4)(m_f+6σ_N) of l(0); must be positive.
double l0_radicand(double eta, double kappa, double m_f, double sigmaN);

/// M' = 1ᵀλ(0)/√(Nn) + (√(Nn)/σ₂ + √(Nn)) M₁ + √(Nn) M₂.
double derive_Mprime(const ProblemData& d, double dual_sum0);
/// M₀ = √(2Nn) M + M'.
double derive_M0(const ProblemData& d, double M, double Mprime);

/// l_α(0) = √2 c₂ M₀/(κσ_N) √(radicand/(Nn(12σ_N+33))) e^{−α(η/2)T − α σ̄ T}.
double derive_l0(const ProblemData& d, double kappa, double eta, double c2, double M0,
                 double T, double alpha);

/// ⌈max{2M₀/l(0), √(2Nn)/c₂ · e^{α(η/2)T + α σ̄ T}}⌉.
int derive_L(const ProblemData& d, double c2, double M0, double l0, double eta,
             double T, double alpha);

struct TCheck {
  double lhs = 0.0;    ///< (e^{α σ̄ T} − 1)(e^{α(η/2)T} − 1) ρ / α
  double slack = 0.0;  ///< c₁ − lhs
  bool pass = false;   ///< lhs ≤ c₁
};

TCheck check_T(double T, double rho, double eta, double sigmaN, double c1,
               double alpha);
/// Requires a derived-mode set.
TCheck check_T(double T, const ParameterSet& p);

/// Largest T with lhs(T) = c₁, found by bisection.
double max_admissible_T(double rho, double eta, double sigmaN, double c1, double alpha);

struct DerivationInputs {
  double kappa = 0.0;
  double beta = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double rho0 = 0.0;
  double alpha = 1.0;
  std::optional<double> T;  ///< defaults to half the largest admissible period
  std::optional<int> L;     ///< must not be below the derived minimum
};

void validate_inputs(const DerivationInputs& in);

/// Full derivation: η, ρ, M (fixed point against the quantized z(0)), M', M₀,
/// T, l(0), L, and the range decay α(η/2)T.
ParameterSet derive_parameters(const ProblemData& d, const NetworkGraph& graph,
                               const Eigen::Ref<const Eigen::VectorXd>& x0,
                               const DerivationInputs& in);

/// Parameters taken verbatim from the user (the §IV style).
ParameterSet manual_mode(const ProblemData& d, double T, double l0,
                         double decay_per_step, int L, double alpha = 1.0,
                         std::optional<double> eta = std::nullopt);

/// Re-evaluate the period predicate and the level bound of a derived set.
/// Returns human-readable violations (empty when consistent).
std::vector<std::string> self_check(const ParameterSet& p);

struct BandwidthReport {
  double alpha = 0.0;
  double T_alpha = 0.0;
  double l0_alpha = 0.0;
  int L_alpha = 0;
  double bandwidth = 0.0;  ///< log₂(L_α)/T_α bits per second
  double gamma = 0.0;      ///< e^{αη/2}
  double C0 = 0.0;
  double C1 = 0.0;
  double bound = 0.0;      ///< C₀ ln γ_α + C₁
  bool holds = false;      ///< bandwidth ≤ bound
  TCheck period_check;     ///< the α-scaled predicate evaluated at T_α
  std::vector<std::string> notes;
};

/// Bandwidth quantities at gain α for a derived-mode set.
BandwidthReport bandwidth_relation(double alpha, const ParameterSet& p);

}  // namespace qdpd

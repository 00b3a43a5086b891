#include "qdpd/params.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qdpd/errors.hpp"

namespace qdpd {

namespace {

const double kSqrt5 = std::sqrt(5.0);

void require_positive(double v, const char* name) {
  if (!(v > 0) || !std::isfinite(v)) {
    throw DomainError(std::string(name) + " must be positive and finite");
  }
}

const ParameterSet& require_derived(const ParameterSet& p) {
  if (p.mode != ParameterMode::Derived || !p.eta || !p.rho || !p.c1 || !p.c2 ||
      !p.rho0 || !p.kappa || !p.M0) {
    throw DomainError("operation needs a derived-mode parameter set");
  }
  return p;
}

}  // namespace

ProblemData describe(const GlobalProblem& problem, const NetworkGraph& graph,
                     const CentralizedSolution& solution) {
  if (problem.agent_count() != graph.node_count()) {
    throw ShapeError("problem and graph disagree on the agent count");
  }
  ProblemData d;
  d.N = graph.node_count();
  d.n = problem.dimension();
  d.m_f = problem.smoothness();
  d.sigma2 = graph.sigma2();
  d.sigmaN = graph.sigmaN();
  d.M1 = solution.M1;
  d.M2 = solution.M2;
  return d;
}

double sigma_bar(double sigmaN) { return std::sqrt((3.0 + kSqrt5) / 2.0) * sigmaN; }

double derive_eta(double beta, double kappa, double m_f, double sigmaN) {
  if (!(beta > 0 && beta < 1)) throw DomainError("beta must lie in (0, 1)");
  require_positive(kappa, "kappa");
  require_positive(m_f, "m_f");
  require_positive(sigmaN, "sigma_N");
  return beta / (kappa * kappa * (m_f + 6.0 * sigmaN));
}

double derive_rho(double eta, double kappa, double m_f, double sigmaN) {
  require_positive(eta, "eta");
  require_positive(kappa, "kappa");
  require_positive(m_f, "m_f");
  require_positive(sigmaN, "sigma_N");
  const double radicand =
      sigmaN - sigmaN * kappa * kappa * (eta + 4.0) * (m_f + 4.0 * sigmaN);
  if (!(radicand > 0)) {
    throw InfeasibleParameters(
        "sigma_N - sigma_N kappa^2 (eta+4)(m_f+4 sigma_N) > 0", radicand);
  }
  return std::sqrt(2.0) * (6.0 * sigmaN + 2.0 * m_f) * kappa *
         std::sqrt((m_f + 4.0 * sigmaN) * (4.0 * sigmaN + 11.0)) /
         (eta * std::sqrt(3.0 + kSqrt5) * std::sqrt(radicand));
}

double l0_radicand(double eta, double kappa, double m_f, double sigmaN) {
  return 3.0 - kappa * kappa * (3.0 * eta + 4.0) * (m_f + 6.0 * sigmaN);
}

double derive_Mprime(const ProblemData& d, double dual_sum0) {
  const double rootNn = std::sqrt(static_cast<double>(d.N) * d.n);
  require_positive(d.sigma2, "sigma_2");
  return dual_sum0 / rootNn + (rootNn / d.sigma2 + rootNn) * d.M1 + rootNn * d.M2;
}

double derive_M0(const ProblemData& d, double M, double Mprime) {
  return std::sqrt(2.0 * d.N * d.n) * M + Mprime;
}

double derive_l0(const ProblemData& d, double kappa, double eta, double c2, double M0,
                 double T, double alpha) {
  const double radicand = l0_radicand(eta, kappa, d.m_f, d.sigmaN);
  if (!(radicand > 0)) {
    throw InfeasibleParameters("3 - kappa^2 (3 eta+4)(m_f+6 sigma_N) > 0", radicand);
  }
  const double Nn = static_cast<double>(d.N) * d.n;
  return std::sqrt(2.0) * c2 * M0 / (kappa * d.sigmaN) *
         std::sqrt(radicand / (Nn * (12.0 * d.sigmaN + 33.0))) *
         std::exp(-alpha * eta / 2.0 * T - alpha * sigma_bar(d.sigmaN) * T);
}

int derive_L(const ProblemData& d, double c2, double M0, double l0, double eta,
             double T, double alpha) {
  require_positive(l0, "l(0)");
  const double first = 2.0 * M0 / l0;
  const double second = std::sqrt(2.0 * d.N * d.n) / c2 *
                        std::exp(alpha * eta / 2.0 * T + alpha * sigma_bar(d.sigmaN) * T);
  const double bound = std::ceil(std::max(first, second));
  if (!(bound < 1e9)) {
    throw InfeasibleParameters("L below 1e9 levels", bound);
  }
  return std::max(1, static_cast<int>(bound));
}

TCheck check_T(double T, double rho, double eta, double sigmaN, double c1,
               double alpha) {
  TCheck c;
  c.lhs = std::expm1(alpha * sigma_bar(sigmaN) * T) * std::expm1(alpha * eta / 2.0 * T) *
          rho / alpha;
  c.slack = c1 - c.lhs;
  c.pass = c.lhs <= c1;
  return c;
}

TCheck check_T(double T, const ParameterSet& p) {
  require_derived(p);
  return check_T(T, *p.rho, *p.eta, p.problem.sigmaN, *p.c1, p.alpha);
}

double max_admissible_T(double rho, double eta, double sigmaN, double c1, double alpha) {
  require_positive(rho, "rho");
  require_positive(eta, "eta");
  require_positive(c1, "c1");
  require_positive(alpha, "alpha");
  double lo = 0.0, hi = 1e-6;
  while (check_T(hi, rho, eta, sigmaN, c1, alpha).pass) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw DomainError("period predicate admits unbounded T");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (check_T(mid, rho, eta, sigmaN, c1, alpha).pass ? lo : hi) = mid;
  }
  return lo;
}

void validate_inputs(const DerivationInputs& in) {
  require_positive(in.kappa, "kappa");
  if (!(in.beta > 0 && in.beta < 1)) throw DomainError("beta must lie in (0, 1)");
  if (!(in.c1 > 0 && in.c1 < 1)) throw DomainError("c1 must lie in (0, 1)");
  if (!(in.c2 > 0 && in.c2 < 1 - in.c1)) throw DomainError("c2 must lie in (0, 1 - c1)");
  if (!(in.rho0 > 1) || !std::isfinite(in.rho0)) throw DomainError("rho0 must exceed 1");
  require_positive(in.alpha, "alpha");
  if (in.T) require_positive(*in.T, "T");
  if (in.L && *in.L < 1) throw DomainError("L must be at least 1");
}

ParameterSet derive_parameters(const ProblemData& d, const NetworkGraph& graph,
                               const Eigen::Ref<const Eigen::VectorXd>& x0,
                               const DerivationInputs& in) {
  validate_inputs(in);
  if (x0.size() != d.N * d.n) throw ShapeError("x(0) has the wrong length");

  ParameterSet p;
  p.mode = ParameterMode::Derived;
  p.problem = d;
  p.alpha = in.alpha;
  p.kappa = in.kappa;
  p.beta = in.beta;
  p.c1 = in.c1;
  p.c2 = in.c2;
  p.rho0 = in.rho0;

  const double eta = derive_eta(in.beta, in.kappa, d.m_f, d.sigmaN);
  const double rho = derive_rho(eta, in.kappa, d.m_f, d.sigmaN);
  const double rad = l0_radicand(eta, in.kappa, d.m_f, d.sigmaN);
  if (!(rad > 0)) {
    throw InfeasibleParameters("3 - kappa^2 (3 eta+4)(m_f+6 sigma_N) > 0", rad);
  }
  p.eta = eta;
  p.rho = rho;

  if (in.T) {
    const TCheck c = check_T(*in.T, rho, eta, d.sigmaN, in.c1, in.alpha);
    if (!c.pass) {
      throw InfeasibleParameters(
          "(e^{alpha sigma_bar T}-1)(e^{alpha eta T/2}-1) rho/alpha <= c1", c.slack);
    }
    p.T = *in.T;
  } else {
    p.T = 0.5 * max_admissible_T(rho, eta, d.sigmaN, in.c1, in.alpha);
    p.notes.push_back("T not supplied; using half the largest admissible period");
  }

  double M = std::max(x0.lpNorm<Eigen::Infinity>(),
                      graph.apply_laplacian(x0, d.n).lpNorm<Eigen::Infinity>());
  double dual_sum0 = 0.0;
  for (int it = 0; it < 64; ++it) {
    const double Mprime = derive_Mprime(d, dual_sum0);
    const double M0 = derive_M0(d, M, Mprime);
    const double l0 = derive_l0(d, in.kappa, eta, in.c2, M0, p.T, in.alpha);
    const int L_min = derive_L(d, in.c2, M0, l0, eta, p.T, in.alpha);
    if (in.L && *in.L < L_min) {
      throw InfeasibleParameters("L >= " + std::to_string(L_min), *in.L - L_min);
    }
    const int L = in.L ? *in.L : L_min;
    const double decay = in.alpha * eta / 2.0 * p.T;
    const Scheme scheme{QuantizerSpec(L), LengthSchedule(l0, decay, p.T)};
    const Eigen::VectorXd z0 = initial_state(graph, scheme, x0, d.n).second;
    const double M_actual = z0.lpNorm<Eigen::Infinity>();
    const double sum_actual = z0.tail(d.N * d.n).sum();
    if (M_actual <= M && std::abs(sum_actual - dual_sum0) <= 1e-12 * std::max(1.0, M)) {
      p.M = M;
      p.Mprime = Mprime;
      p.M0 = M0;
      p.l0 = l0;
      p.L = L;
      p.decay_per_step = decay;
      return p;
    }
    M = std::max(M, M_actual);
    dual_sum0 = sum_actual;
  }
  throw DomainError("bound M on the initial state did not settle");
}

ParameterSet manual_mode(const ProblemData& d, double T, double l0,
                         double decay_per_step, int L, double alpha,
                         std::optional<double> eta) {
  require_positive(T, "T");
  require_positive(l0, "l(0)");
  require_positive(decay_per_step, "range decay");
  require_positive(alpha, "alpha");
  if (L < 1) throw DomainError("L must be at least 1");
  if (eta) require_positive(*eta, "eta");
  ParameterSet p;
  p.mode = ParameterMode::Manual;
  p.problem = d;
  p.T = T;
  p.l0 = l0;
  p.decay_per_step = decay_per_step;
  p.L = L;
  p.alpha = alpha;
  p.eta = eta;
  return p;
}

std::vector<std::string> self_check(const ParameterSet& p) {
  std::vector<std::string> issues;
  if (p.mode != ParameterMode::Derived) return issues;
  require_derived(p);
  const TCheck c = check_T(p.T, p);
  if (!c.pass) {
    issues.push_back("period predicate fails: lhs " + std::to_string(c.lhs) + " > c1 " +
                     std::to_string(*p.c1));
  }
  const int L_min = derive_L(p.problem, *p.c2, *p.M0, p.l0, *p.eta, p.T, p.alpha);
  if (p.L < L_min) {
    issues.push_back("L = " + std::to_string(p.L) + " below the bound " +
                     std::to_string(L_min));
  }
  const double l0 = derive_l0(p.problem, *p.kappa, *p.eta, *p.c2, *p.M0, p.T, p.alpha);
  if (std::abs(l0 - p.l0) > 1e-12 * l0) issues.push_back("l(0) disagrees with its formula");
  return issues;
}

BandwidthReport bandwidth_relation(double alpha, const ParameterSet& p) {
  require_derived(p);
  require_positive(alpha, "alpha");
  const ProblemData& d = p.problem;
  const double eta = *p.eta, rho = *p.rho, rho0 = *p.rho0, c1 = *p.c1, c2 = *p.c2;
  const double sN = d.sigmaN;
  const double Nn = static_cast<double>(d.N) * d.n;
  const double log2e = 1.0 / std::log(2.0);

  BandwidthReport r;
  r.alpha = alpha;
  r.gamma = std::exp(alpha * eta / 2.0);
  const double ln_gamma = alpha * eta / 2.0;
  const double spread = std::sqrt(24.0 + 8.0 * kSqrt5) * sN + 2.0 * eta;
  r.T_alpha = 1.0 / (spread / (2.0 * eta * std::log(rho0)) * ln_gamma +
                     2.0 * c1 / (rho * rho0 * eta));
  r.l0_alpha = derive_l0(d, *p.kappa, eta, c2, *p.M0, r.T_alpha, alpha);
  r.L_alpha = derive_L(d, c2, *p.M0, r.l0_alpha, eta, r.T_alpha, alpha);
  r.bandwidth = std::log2(static_cast<double>(r.L_alpha)) / r.T_alpha;
  r.C0 = log2e * (1.0 + std::sqrt(6.0 + kSqrt5) * sN / eta) +
         spread / (eta * std::log(rho0)) * (std::log2(2.0 * Nn) - 2.0 * std::log2(c2));
  r.C1 = (0.5 * std::log2(2.0 * Nn) - std::log2(c2)) * 2.0 * c2 / (rho * rho0 * eta);
  r.bound = r.C0 * ln_gamma + r.C1;
  r.holds = r.bandwidth <= r.bound;
  r.period_check = check_T(r.T_alpha, rho, eta, sN, c1, alpha);
  r.notes.push_back("C1 carries c2 while T_alpha carries c1, both as printed");
  if (!r.period_check.pass) {
    r.notes.push_back("T_alpha violates the alpha-scaled period predicate");
  }
  return r;
}

}  // namespace qdpd

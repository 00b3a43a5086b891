#include "qdpd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qdpd/errors.hpp"

namespace qdpd {

namespace {

Eigen::MatrixXd kron_identity(const Eigen::MatrixXd& L, int n) {
  const Eigen::Index N = L.rows();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N * n, N * n);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      if (L(i, j) != 0.0) {
        K.block(i * n, j * n, n, n) = L(i, j) * Eigen::MatrixXd::Identity(n, n);
      }
    }
  }
  return K;
}

int stacked_size(const GlobalProblem& problem, const NetworkGraph& graph) {
  if (problem.agent_count() != graph.node_count()) {
    throw ShapeError("problem and graph disagree on the agent count");
  }
  return graph.node_count() * problem.dimension();
}

}  // namespace

KktResidual kkt_residual(const GlobalProblem& problem, const NetworkGraph& graph,
                         const Eigen::Ref<const Eigen::VectorXd>& z) {
  const int Nn = stacked_size(problem, graph);
  if (z.size() != 2 * Nn) throw ShapeError("kkt_residual: state has wrong length");
  const int n = problem.dimension();
  const Eigen::VectorXd Lx = graph.apply_laplacian(z.head(Nn), n);
  const Eigen::VectorXd first =
      problem.gradient_stacked(z.head(Nn)) + Lx + graph.apply_laplacian(z.tail(Nn), n);
  KktResidual r;
  r.stationarity = first.norm();
  r.consensus = Lx.norm();
  r.total = std::hypot(r.stationarity, r.consensus);
  return r;
}

PrimalDualReference dual_reference(const GlobalProblem& problem,
                                   const NetworkGraph& graph,
                                   const CentralizedSolution& solution,
                                   const Eigen::Ref<const Eigen::VectorXd>& lambda0,
                                   double tol) {
  const int Nn = stacked_size(problem, graph);
  const int N = graph.node_count();
  const int n = problem.dimension();
  if (lambda0.size() != Nn) throw ShapeError("dual_reference: lambda(0) has wrong length");
  if (solution.x_star.size() != n) throw ShapeError("dual_reference: x* has wrong length");

  const Eigen::VectorXd X = solution.x_star.replicate(N, 1);
  const Eigen::VectorXd rhs = -problem.gradient_stacked(X) - graph.apply_laplacian(X, n);
  const Eigen::MatrixXd K = kron_identity(graph.laplacian(), n);
  Eigen::VectorXd lambda = K.completeOrthogonalDecomposition().solve(rhs);

  for (int c = 0; c < n; ++c) {
    double target = 0.0, current = 0.0;
    for (int i = 0; i < N; ++i) {
      target += lambda0[i * n + c];
      current += lambda[i * n + c];
    }
    const double shift = (target - current) / N;
    for (int i = 0; i < N; ++i) lambda[i * n + c] += shift;
  }

  PrimalDualReference ref;
  ref.residual = (K * lambda - rhs).norm();
  if (!(ref.residual <= tol * std::max(1.0, rhs.norm()))) {
    throw KktError("first KKT block is inconsistent at x* (residual " +
                   std::to_string(ref.residual) + ")");
  }
  ref.z_star.resize(2 * Nn);
  ref.z_star << X, lambda;
  ref.f_star = problem.value_stacked(X);
  ref.lambda_norm = lambda.norm();
  const double rootNn = std::sqrt(static_cast<double>(Nn));
  ref.lambda_bound =
      lambda0.sum() / rootNn + rootNn * (solution.M1 / graph.sigma2() + solution.M2);
  ref.bound_holds = ref.lambda_norm <= ref.lambda_bound * (1.0 + 1e-12) + 1e-12;
  return ref;
}

double lyapunov(const GlobalProblem& problem, const NetworkGraph& graph,
                const Eigen::Ref<const Eigen::VectorXd>& z,
                const PrimalDualReference& ref) {
  const int Nn = stacked_size(problem, graph);
  if (z.size() != 2 * Nn || ref.z_star.size() != 2 * Nn) {
    throw ShapeError("lyapunov: state has wrong length");
  }
  const int n = problem.dimension();
  const auto x = z.head(Nn);
  const auto lambda = z.tail(Nn);
  const Eigen::VectorXd Lx = graph.apply_laplacian(x, n);
  const double V1 = 0.5 * (z - ref.z_star).squaredNorm();
  const double V2 =
      problem.value_stacked(x) - ref.f_star + 0.5 * x.dot(Lx) + lambda.dot(Lx);
  return 4.0 * graph.sigmaN() * V1 + V2;
}

std::pair<double, double> lyapunov_bounds(const GlobalProblem& problem,
                                          const NetworkGraph& graph) {
  const double sN = graph.sigmaN();
  return {1.5 * sN, (problem.smoothness() + 6.0 * sN) / 2.0};
}

double Envelope::a(double t) const { return a0 * std::exp(-rate * t); }

double Envelope::b(double t) const {
  const double k = std::floor(t / period + 1e-9);
  return b0 * std::exp(-rate / 2.0 * (k + 1.0) * period);
}

std::optional<Envelope> envelopes(const ParameterSet& p) {
  if (p.mode != ParameterMode::Derived || !p.kappa || !p.eta || !p.M0) return std::nullopt;
  const ProblemData& d = p.problem;
  const double rad = l0_radicand(*p.eta, *p.kappa, d.m_f, d.sigmaN);
  if (!(rad > 0)) return std::nullopt;
  Envelope e;
  e.a0 = (d.m_f + 6.0 * d.sigmaN) / 2.0 * (*p.M0) * (*p.M0);
  e.b0 = *p.M0 / (*p.kappa * d.sigmaN) * std::sqrt(rad / (12.0 * d.sigmaN + 33.0));
  e.rate = p.alpha * *p.eta;
  e.period = p.T;
  return e;
}

double tracking_error(const CentralizedSolution& solution,
                      const Eigen::Ref<const Eigen::VectorXd>& x, int n) {
  double sq = 0.0;
  for (Eigen::Index i = 0; i < x.size() / n; ++i) {
    const double d = solution.distance(x.segment(i * n, n));
    sq += d * d;
  }
  return std::sqrt(sq);
}

double max_agent_distance(const CentralizedSolution& solution,
                          const Eigen::Ref<const Eigen::VectorXd>& x, int n) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < x.size() / n; ++i) {
    m = std::max(m, solution.distance(x.segment(i * n, n)));
  }
  return m;
}

std::vector<DiagnosticSample> diagnose(const GlobalProblem& problem,
                                       const NetworkGraph& graph,
                                       const TrajectoryRecord& trajectory,
                                       const CentralizedSolution& solution,
                                       const PrimalDualReference& ref) {
  const int Nn = stacked_size(problem, graph);
  const int n = problem.dimension();
  std::vector<DiagnosticSample> out;
  out.reserve(trajectory.samples.size());
  Eigen::VectorXd z(2 * Nn);
  for (const TrajectorySample& s : trajectory.samples) {
    z << s.x, s.lambda;
    const KktResidual r = kkt_residual(problem, graph, z);
    DiagnosticSample d;
    d.t = s.t;
    d.F_norm = r.total;
    d.V = lyapunov(problem, graph, z, ref);
    d.e_norm = s.e_norm;
    d.consensus_residual = r.consensus;
    d.dual_sum = s.lambda.sum();
    d.tracking_error = tracking_error(solution, s.x, n);
    d.J = std::exp(0.01 * s.t) * d.tracking_error;
    out.push_back(d);
  }
  return out;
}

EnvelopeReport check_envelopes(const Envelope& env,
                               const std::vector<DiagnosticSample>& diagnostics) {
  EnvelopeReport r;
  for (const DiagnosticSample& d : diagnostics) {
    ++r.samples;
    if (!(d.V <= env.a(d.t))) ++r.V_violations;
    if (!(d.e_norm < env.b(d.t))) ++r.e_violations;
  }
  return r;
}

std::optional<RateFit> fit_rate(const std::vector<double>& t,
                                const std::vector<double>& err, double t1, double t2) {
  if (t.size() != err.size()) throw ShapeError("fit_rate: series lengths differ");
  double scale = 0.0;
  for (double e : err) {
    if (std::isfinite(e)) scale = std::max(scale, std::abs(e));
  }
  const double floor_level = 1e2 * std::numeric_limits<double>::epsilon() * scale;

  std::vector<double> ts, ls;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t1 || t[k] > t2) continue;
    if (!(err[k] > floor_level)) break;
    ts.push_back(t[k]);
    ls.push_back(std::log(err[k]));
  }
  if (ts.size() < 3) return std::nullopt;

  const double m = static_cast<double>(ts.size());
  double tbar = 0.0, lbar = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    tbar += ts[k];
    lbar += ls[k];
  }
  tbar /= m;
  lbar /= m;
  double stt = 0.0, stl = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    stt += (ts[k] - tbar) * (ts[k] - tbar);
    stl += (ts[k] - tbar) * (ls[k] - lbar);
  }
  if (!(stt > 0)) return std::nullopt;
  const double slope = stl / stt;
  RateFit fit;
  fit.exponent = -slope;
  fit.intercept = lbar - slope * tbar;
  double ss = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double r = ls[k] - (fit.intercept + slope * ts[k]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / m);
  fit.points = static_cast<int>(ts.size());
  return fit;
}

std::optional<RateFit> fit_rate(const TrajectoryRecord& trajectory,
                                const CentralizedSolution& solution,
                                std::optional<double> t1, std::optional<double> t2) {
  if (trajectory.samples.empty()) return std::nullopt;
  std::vector<double> t, err;
  t.reserve(trajectory.samples.size());
  err.reserve(trajectory.samples.size());
  for (const TrajectorySample& s : trajectory.samples) {
    t.push_back(s.t);
    err.push_back(tracking_error(solution, s.x, trajectory.dimension));
  }
  const double t_end = t.back();
  return fit_rate(t, err, t1.value_or(0.2 * t_end), t2.value_or(t_end));
}

bool smoothed_nonincreasing(const std::vector<double>& series, std::size_t block) {
  if (block == 0) throw DomainError("block size must be positive");
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t start = 0; start < series.size(); start += block) {
    const std::size_t stop = std::min(series.size(), start + block);
    const double m = *std::max_element(series.begin() + start, series.begin() + stop);
    if (m > previous) return false;
    previous = m;
  }
  return true;
}

}  // namespace qdpd

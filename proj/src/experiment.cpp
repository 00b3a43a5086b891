#include "qdpd/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <string>

#include "qdpd/errors.hpp"

namespace qdpd {

Experiment build_experiment(const RunConfig& cfg) {
  GlobalProblem problem = build_problem(cfg.problem);
  NetworkGraph graph = build_graph(cfg.topology);
  if (problem.agent_count() != graph.node_count()) {
    throw ConfigError("problem has " + std::to_string(problem.agent_count()) +
                      " agents but the topology has " +
                      std::to_string(graph.node_count()) + " nodes");
  }
  if (cfg.run.x0.size() != graph.node_count() * problem.dimension()) {
    throw ConfigError("run.x0 needs " +
                      std::to_string(graph.node_count() * problem.dimension()) +
                      " entries, got " + std::to_string(cfg.run.x0.size()));
  }
  CentralizedSolution solution = solve_centralized(problem);
  ProblemData data = describe(problem, graph, solution);
  return {cfg, std::move(problem), std::move(graph), std::move(solution), data};
}

ParameterSet resolve_parameters(const Experiment& ex, double alpha) {
  const ParamsConfig& p = ex.config.params;
  if (p.mode == "manual") {
    return manual_mode(ex.data, *p.T, *p.l0, *p.decay_per_step * alpha, *p.levels - 1,
                       alpha, p.eta);
  }
  DerivationInputs in;
  in.kappa = *p.kappa;
  in.beta = *p.beta;
  in.c1 = *p.c1;
  in.c2 = *p.c2;
  in.rho0 = *p.rho0;
  in.alpha = alpha;
  in.T = p.T;
  if (p.levels) in.L = *p.levels - 1;
  return derive_parameters(ex.data, ex.graph, ex.config.run.x0, in);
}

IntegratorConfig integrator_config(const RunConfig& cfg, double alpha) {
  IntegratorConfig ic;
  ic.substeps = cfg.run.substeps;
  ic.alpha = alpha;
  ic.blowup_guard = cfg.run.blowup_guard;
  return ic;
}

RunSummary summarize(const TrajectoryRecord& trajectory,
                     const std::vector<DiagnosticSample>& diagnostics,
                     const CentralizedSolution& solution) {
  RunSummary s;
  if (trajectory.samples.empty()) return s;
  s.final_max_distance =
      max_agent_distance(solution, trajectory.samples.back().x, trajectory.dimension);
  if (!diagnostics.empty()) {
    s.final_F_norm = diagnostics.back().F_norm;
    const double base = diagnostics.front().dual_sum;
    for (const DiagnosticSample& d : diagnostics) {
      s.dual_drift = std::max(s.dual_drift, std::abs(d.dual_sum - base));
    }
  }
  s.rate = fit_rate(trajectory, solution);
  return s;
}

namespace {

std::vector<DiagnosticSample> diagnostics_for(const Experiment& ex,
                                              const TrajectoryRecord& trajectory) {
  if (trajectory.samples.empty()) return {};
  const PrimalDualReference ref =
      dual_reference(ex.problem, ex.graph, ex.solution, trajectory.samples.front().lambda);
  return diagnose(ex.problem, ex.graph, trajectory, ex.solution, ref);
}

}  // namespace

ExperimentResult run_experiment(const Experiment& ex, std::optional<double> alpha) {
  const double a = alpha.value_or(ex.config.run.alpha);
  ExperimentResult r;
  r.params = resolve_parameters(ex, a);
  r.warnings = r.params.notes;
  for (const std::string& issue : self_check(r.params)) r.warnings.push_back(issue);

  const IntegratorConfig ic = integrator_config(ex.config, a);
  const std::int64_t horizon = ex.config.run.horizon_periods;
  r.quantized = simulate(ex.problem, ex.graph, r.params.scheme(), ic, horizon,
                         ex.config.run.x0);
  r.diagnostics = diagnostics_for(ex, r.quantized.trajectory);
  r.summary = summarize(r.quantized.trajectory, r.diagnostics, ex.solution);

  if (const std::optional<Envelope> env = envelopes(r.params)) {
    r.envelope = check_envelopes(*env, r.diagnostics);
    if (r.envelope->V_violations > 0) {
      r.warnings.push_back("V exceeded a(t) at " + std::to_string(r.envelope->V_violations) +
                           " samples");
    }
    if (r.envelope->e_violations > 0) {
      r.warnings.push_back("quantization error reached b(t) at " +
                           std::to_string(r.envelope->e_violations) + " samples");
    }
  }

  if (ex.config.run.compare_exact) {
    r.exact = simulate_exact(ex.problem, ex.graph, r.params.T, ic, horizon,
                             ex.config.run.x0);
    r.exact_diagnostics = diagnostics_for(ex, r.exact->trajectory);
    r.exact_summary = summarize(r.exact->trajectory, r.exact_diagnostics, ex.solution);
  }

  const bool exact_ok = !r.exact || r.exact->ok();
  r.exit_status = r.quantized.ok() && exact_ok ? 0 : 1;
  return r;
}

std::vector<SweepEntry> sweep_alpha(const Experiment& ex, const std::vector<double>& alphas) {
  std::vector<std::future<ExperimentResult>> futures;
  futures.reserve(alphas.size());
  for (double a : alphas) {
    if (!(a > 0)) throw DomainError("sweep gains must be positive");
    futures.push_back(std::async(std::launch::async, [&ex, a] { return run_experiment(ex, a); }));
  }
  std::vector<SweepEntry> out;
  out.reserve(alphas.size());
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    out.push_back({alphas[k], futures[k].get()});
  }
  return out;
}

}  // namespace qdpd

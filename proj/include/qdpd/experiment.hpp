#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdpd/analysis.hpp"
#include "qdpd/config.hpp"
#include "qdpd/dynamics.hpp"
#include "qdpd/graph.hpp"
#include "qdpd/objective.hpp"
#include "qdpd/params.hpp"

namespace qdpd {

/// Everything a run needs that follows from the config alone.
struct Experiment {
  RunConfig config;
  GlobalProblem problem;
  NetworkGraph graph;
  CentralizedSolution solution;
  ProblemData data;
};

Experiment build_experiment(const RunConfig& cfg);

/// ParameterSet for the config at gain `alpha`. Manual mode scales the
/// per-step range decay by alpha; derived mode applies the α-scaled formulas.
ParameterSet resolve_parameters(const Experiment& ex, double alpha);

IntegratorConfig integrator_config(const RunConfig& cfg, double alpha);

struct RunSummary {
  double final_max_distance = 0.0;  ///< max_i d(x_i, X*) at the last sample
  double final_F_norm = 0.0;
  double dual_drift = 0.0;          ///< max_k |1ᵀλ(kT) − 1ᵀλ(0)|
  std::optional<RateFit> rate;
};

struct ExperimentResult {
  ParameterSet params;
  RunOutcome quantized;
  std::vector<DiagnosticSample> diagnostics;
  RunSummary summary;
  std::optional<RunOutcome> exact;
  std::vector<DiagnosticSample> exact_diagnostics;
  std::optional<RunSummary> exact_summary;
  std::optional<EnvelopeReport> envelope;
  std::vector<std::string> warnings;
  int exit_status = 0;  ///< 0 success, 1 algorithmic failure
};

/// params → dynamics → analysis for one config (optionally at another gain).
ExperimentResult run_experiment(const Experiment& ex,
                                std::optional<double> alpha = std::nullopt);

/// Summary statistics of a trajectory against the solution set.
RunSummary summarize(const TrajectoryRecord& trajectory,
                     const std::vector<DiagnosticSample>& diagnostics,
                     const CentralizedSolution& solution);

struct SweepEntry {
  double alpha = 0.0;
  ExperimentResult result;
};

/// Independent runs at each gain, executed concurrently.
std::vector<SweepEntry> sweep_alpha(const Experiment& ex, const std::vector<double>& alphas);

}  // namespace qdpd

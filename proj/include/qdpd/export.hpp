#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qdpd/analysis.hpp"
#include "qdpd/config.hpp"
#include "qdpd/dynamics.hpp"
#include "qdpd/experiment.hpp"

namespace qdpd {

const char* library_version();

/// Header t, x_1..x_N, lambda_1..lambda_N, qx_.., qlambda_.., e_norm, bits_cum
/// (per-coordinate names x_i_c when n > 1).
std::string trajectory_csv(const TrajectoryRecord& trajectory);
/// Header t, F_norm, V, consensus_residual, dual_sum, tracking_error, J.
std::string diagnostics_csv(const std::vector<DiagnosticSample>& diagnostics);

/// Structured record of one run: the canonical config (with the run's gain),
/// its hash, resolved parameters, the oracle x* fixture, summary and status.
std::string manifest_text(const Experiment& ex, const ExperimentResult& result);

/// Writes trajectory.csv, diagnostics.csv, manifest.json (plus the *_exact.csv
/// pair when the exact comparison ran). Throws IoError naming the path.
std::vector<std::filesystem::path> export_run(const Experiment& ex,
                                              const ExperimentResult& result,
                                              const std::filesystem::path& dir);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Config embedded in a manifest written by export_run.
RunConfig config_from_manifest(const std::filesystem::path& path);

/// Load either a config file or a manifest (recognized by its .json suffix).
RunConfig load_run_source(const std::filesystem::path& path);

}  // namespace qdpd

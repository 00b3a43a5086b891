#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdpd/graph.hpp"
#include "qdpd/objective.hpp"

namespace qdpd {

struct QuadraticRow {
  Eigen::VectorXd weights;
  Eigen::VectorXd centers;
};

struct ProblemConfig {
  std::string name = "table1";        ///< "table1" or "inline"
  std::string family = "piecewise";   ///< inline family: "piecewise" or "quadratic"
  std::vector<PiecewiseQuadCoefficients> piecewise;
  std::vector<QuadraticRow> quadratic;
};

struct TopologyConfig {
  std::string kind = "ring";  ///< "ring", "complete" or "edges"
  int nodes = 0;
  std::vector<Edge> edges;    ///< 0-based; written 1-based in files
};

struct ParamsConfig {
  std::string mode = "manual";  ///< "manual" or "derived"
  // manual
  std::optional<double> T;
  std::optional<double> l0;
  std::optional<double> decay_per_step;
  std::optional<int> levels;  ///< L + 1
  std::optional<double> eta;
  // derived
  std::optional<double> kappa;
  std::optional<double> beta;
  std::optional<double> c1;
  std::optional<double> c2;
  std::optional<double> rho0;
};

struct RunSection {
  double alpha = 1.0;
  std::int64_t horizon_periods = 0;
  int substeps = 50;
  std::uint64_t seed = 0;
  std::string output = "qdpd_out";
  Eigen::VectorXd x0;
  bool compare_exact = false;
  double blowup_guard = 1e9;
};

struct RunConfig {
  ProblemConfig problem;
  TopologyConfig topology;
  ParamsConfig params;
  RunSection run;
};

/// Parse the sectioned key=value format. `origin` names the source in errors.
/// Throws ConfigError (unknown keys are listed together) or DomainError.
RunConfig parse_config(const std::string& text, const std::string& origin = "<string>");

/// Reads `path`; throws IoError when unreadable.
RunConfig load_config(const std::filesystem::path& path);

/// Deterministic text form of a config (every value rendered at 17 digits).
/// parse_config(canonical_text(c)) reproduces c exactly.
std::string canonical_text(const RunConfig& cfg);

/// 64-bit FNV-1a of the canonical text, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// %.17g rendering used by every exporter.
std::string format_double(double v);

GlobalProblem build_problem(const ProblemConfig& cfg);
NetworkGraph build_graph(const TopologyConfig& cfg);

}  // namespace qdpd

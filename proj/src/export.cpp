#include "qdpd/export.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "qdpd/errors.hpp"

#ifndef QDPD_VERSION
#define QDPD_VERSION "0.0.0"
#endif

namespace qdpd {

const char* library_version() { return QDPD_VERSION; }

namespace {

void column_names(std::string& out, const char* prefix, int N, int n) {
  for (int i = 1; i <= N; ++i) {
    for (int c = 1; c <= n; ++c) {
      out += ',';
      out += prefix;
      out += '_' + std::to_string(i);
      if (n > 1) out += '_' + std::to_string(c);
    }
  }
}

void append_values(std::string& out, const Eigen::VectorXd& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    out += ',';
    out += format_double(v[k]);
  }
}

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

nlohmann::json summary_json(const RunSummary& s) {
  nlohmann::json j;
  j["final_max_distance"] = s.final_max_distance;
  j["final_F_norm"] = s.final_F_norm;
  j["dual_drift"] = s.dual_drift;
  if (s.rate) {
    j["rate"] = {{"exponent", s.rate->exponent},
                 {"residual", s.rate->residual},
                 {"points", s.rate->points}};
  } else {
    j["rate"] = nullptr;
  }
  return j;
}

nlohmann::json failure_json(const RunOutcome& o) {
  if (!o.failure) return nullptr;
  return {{"kind", to_string(o.failure->kind)},
          {"message", o.failure->message},
          {"step", o.failure->step},
          {"agent", o.failure->agent},
          {"coordinate", o.failure->coordinate}};
}

}  // namespace

std::string trajectory_csv(const TrajectoryRecord& trajectory) {
  const int N = trajectory.agents;
  const int n = trajectory.dimension;
  std::string out = "t";
  column_names(out, "x", N, n);
  column_names(out, "lambda", N, n);
  column_names(out, "qx", N, n);
  column_names(out, "qlambda", N, n);
  out += ",e_norm,bits_cum\n";
  for (const TrajectorySample& s : trajectory.samples) {
    out += format_double(s.t);
    append_values(out, s.x);
    append_values(out, s.lambda);
    append_values(out, s.qx);
    append_values(out, s.qlambda);
    out += ',' + format_double(s.e_norm) + ',' + std::to_string(s.bits_cum) + '\n';
  }
  return out;
}

std::string diagnostics_csv(const std::vector<DiagnosticSample>& diagnostics) {
  std::string out = "t,F_norm,V,consensus_residual,dual_sum,tracking_error,J\n";
  for (const DiagnosticSample& d : diagnostics) {
    out += format_double(d.t) + ',' + format_double(d.F_norm) + ',' + format_double(d.V) +
           ',' + format_double(d.consensus_residual) + ',' + format_double(d.dual_sum) +
           ',' + format_double(d.tracking_error) + ',' + format_double(d.J) + '\n';
  }
  return out;
}

namespace {

nlohmann::json make_manifest(const Experiment& ex, const ExperimentResult& result) {
  RunConfig cfg = ex.config;
  cfg.run.alpha = result.params.alpha;
  const ParameterSet& p = result.params;

  nlohmann::json m;
  m["version"] = library_version();
  m["config_hash"] = config_hash(cfg);
  m["config"] = canonical_text(cfg);

  nlohmann::json params;
  params["mode"] = p.mode == ParameterMode::Manual ? "manual" : "derived";
  params["T"] = p.T;
  params["L"] = p.L;
  params["levels"] = p.L + 1;
  params["l0"] = p.l0;
  params["decay_per_step"] = p.decay_per_step;
  params["alpha"] = p.alpha;
  params["eta"] = optional_number(p.eta);
  params["kappa"] = optional_number(p.kappa);
  params["beta"] = optional_number(p.beta);
  params["c1"] = optional_number(p.c1);
  params["c2"] = optional_number(p.c2);
  params["rho"] = optional_number(p.rho);
  params["rho0"] = optional_number(p.rho0);
  params["M"] = optional_number(p.M);
  params["Mprime"] = optional_number(p.Mprime);
  params["M0"] = optional_number(p.M0);
  params["N"] = p.problem.N;
  params["n"] = p.problem.n;
  params["m_f"] = p.problem.m_f;
  params["sigma2"] = p.problem.sigma2;
  params["sigmaN"] = p.problem.sigmaN;
  params["M1"] = p.problem.M1;
  params["M2"] = p.problem.M2;
  params["bits_per_step"] = bandwidth_per_step(p.quantizer(), p.problem.n, BitMode::Full);
  m["parameters"] = params;

  m["oracle"] = {{"x_star", vector_json(ex.solution.x_star)},
                 {"set_lower", vector_json(ex.solution.set_lower)},
                 {"set_upper", vector_json(ex.solution.set_upper)},
                 {"optimal_value", ex.solution.optimal_value},
                 {"gradient_norm", ex.solution.gradient_norm}};

  m["summary"] = summary_json(result.summary);
  m["failure"] = failure_json(result.quantized);
  if (result.exact) {
    m["exact"] = {{"summary", summary_json(*result.exact_summary)},
                  {"failure", failure_json(*result.exact)}};
  }
  if (result.envelope) {
    m["envelope"] = {{"samples", result.envelope->samples},
                     {"V_violations", result.envelope->V_violations},
                     {"e_violations", result.envelope->e_violations}};
  }
  m["warnings"] = result.warnings;
  m["exit_status"] = result.exit_status;
  return m;
}

}  // namespace

std::string manifest_text(const Experiment& ex, const ExperimentResult& result) {
  return make_manifest(ex, result).dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing", path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("write failed", path.string());
}

std::vector<std::filesystem::path> export_run(const Experiment& ex,
                                              const ExperimentResult& result,
                                              const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory (" + ec.message() + ")", dir.string());

  std::vector<std::filesystem::path> written;
  auto emit = [&](const char* name, const std::string& text) {
    const std::filesystem::path path = dir / name;
    write_text(path, text);
    written.push_back(path);
  };
  emit("trajectory.csv", trajectory_csv(result.quantized.trajectory));
  emit("diagnostics.csv", diagnostics_csv(result.diagnostics));
  if (result.exact) {
    emit("trajectory_exact.csv", trajectory_csv(result.exact->trajectory));
    emit("diagnostics_exact.csv", diagnostics_csv(result.exact_diagnostics));
  }
  emit("manifest.json", manifest_text(ex, result));
  return written;
}

RunConfig config_from_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read manifest", path.string());
  nlohmann::json m;
  try {
    in >> m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": manifest is not valid JSON (" + e.what() + ")");
  }
  if (!m.contains("config") || !m["config"].is_string()) {
    throw ConfigError(path.string() + ": manifest has no embedded config");
  }
  return parse_config(m["config"].get<std::string>(), path.string() + "#config");
}

RunConfig load_run_source(const std::filesystem::path& path) {
  if (path.extension() == ".json") return config_from_manifest(path);
  return load_config(path);
}

}  // namespace qdpd

#include "qdpd/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <ostream>

#include "CLI11.hpp"
#include "qdpd/errors.hpp"
#include "qdpd/experiment.hpp"
#include "qdpd/export.hpp"

namespace qdpd {

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::filesystem::path output_dir(const RunConfig& cfg, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("QDPD_OUT"); env && *env) return env;
  return cfg.run.output;
}

std::string alpha_dirname(double alpha) {
  std::string s = format_double(alpha);
  std::replace(s.begin(), s.end(), '.', 'p');
  return "alpha_" + s;
}

void print_params(std::ostream& out, const ParameterSet& p) {
  out << "mode            " << (p.mode == ParameterMode::Manual ? "manual" : "derived") << "\n";
  out << "T               " << format_double(p.T) << "\n";
  out << "L (levels-1)    " << p.L << "\n";
  out << "l0              " << format_double(p.l0) << "\n";
  out << "decay_per_step  " << format_double(p.decay_per_step) << "\n";
  out << "alpha           " << format_double(p.alpha) << "\n";
  auto opt = [&](const char* name, const std::optional<double>& v) {
    if (v) out << name << format_double(*v) << "\n";
  };
  opt("eta             ", p.eta);
  opt("kappa           ", p.kappa);
  opt("rho             ", p.rho);
  opt("M               ", p.M);
  opt("M'              ", p.Mprime);
  opt("M0              ", p.M0);
  out << "m_f             " << format_double(p.problem.m_f) << "\n";
  out << "sigma2          " << format_double(p.problem.sigma2) << "\n";
  out << "sigmaN          " << format_double(p.problem.sigmaN) << "\n";
  out << "bits/step/agent " << bandwidth_per_step(p.quantizer(), p.problem.n, BitMode::Full)
      << "\n";
}

void print_summary(std::ostream& out, const char* label, const RunSummary& s) {
  out << label << " final max_i d(x_i, X*) = " << fmt("%.6e", s.final_max_distance)
      << ", ||F(z)|| = " << fmt("%.6e", s.final_F_norm)
      << ", dual drift = " << fmt("%.3e", s.dual_drift);
  if (s.rate) {
    out << ", fitted rate = " << fmt("%.6f", s.rate->exponent);
  } else {
    out << ", fitted rate undetermined";
  }
  out << "\n";
}

void report_outcome(std::ostream& out, std::ostream& err, const ExperimentResult& r) {
  if (r.quantized.failure) {
    err << "run failed (" << to_string(r.quantized.failure->kind)
        << "): " << r.quantized.failure->message << "\n";
  }
  print_summary(out, "quantized:", r.summary);
  if (r.exact_summary) {
    if (r.exact->failure) err << "exact run failed: " << r.exact->failure->message << "\n";
    print_summary(out, "exact:    ", *r.exact_summary);
  }
  for (const std::string& w : r.warnings) err << "warning: " << w << "\n";
}

Experiment load_experiment(const std::string& path, bool allow_manifest) {
  const RunConfig cfg = allow_manifest ? load_run_source(path) : load_config(path);
  return build_experiment(cfg);
}

int cmd_run(const std::string& source, const std::string& out_flag, std::ostream& out,
            std::ostream& err) {
  const Experiment ex = load_experiment(source, true);
  ExperimentResult r;
  try {
    r = run_experiment(ex);
  } catch (const InfeasibleParameters& e) {
    err << e.what() << "\n";
    return kExitFailure;
  }
  const std::filesystem::path dir = output_dir(ex.config, out_flag);
  const auto files = export_run(ex, r, dir);
  report_outcome(out, err, r);
  out << "wrote";
  for (const auto& f : files) out << " " << f.string();
  out << "\n";
  return r.exit_status;
}

int cmd_sweep(const std::string& source, const std::vector<double>& alphas,
              const std::string& out_flag, std::ostream& out, std::ostream& err) {
  const Experiment ex = load_experiment(source, false);
  std::vector<SweepEntry> entries;
  try {
    entries = sweep_alpha(ex, alphas);
  } catch (const InfeasibleParameters& e) {
    err << e.what() << "\n";
    return kExitFailure;
  }
  const std::filesystem::path root = output_dir(ex.config, out_flag);
  int status = kExitOk;
  std::optional<double> previous;
  bool increasing = true;
  out << "alpha        rate         status\n";
  for (const SweepEntry& e : entries) {
    export_run(ex, e.result, root / alpha_dirname(e.alpha));
    const auto& rate = e.result.summary.rate;
    out << fmt("%-12g", e.alpha) << " "
        << (rate ? fmt("%-12.6f", rate->exponent) : std::string("undetermined"))
        << " " << (e.result.exit_status == 0 ? "ok" : "failed") << "\n";
    if (e.result.quantized.failure) {
      err << "alpha " << format_double(e.alpha) << ": " << e.result.quantized.failure->message
          << "\n";
    }
    if (e.result.exit_status != 0) status = kExitFailure;
    if (!rate) {
      increasing = false;
    } else {
      if (previous && !(rate->exponent > *previous)) increasing = false;
      previous = rate->exponent;
    }
  }
  out << "rates strictly increasing in alpha: " << (increasing ? "yes" : "no") << "\n";
  return status;
}

int cmd_bandwidth(const std::string& source, const std::vector<double>& alphas,
                  std::ostream& out, std::ostream& err) {
  const Experiment ex = load_experiment(source, false);
  if (ex.config.params.mode != "derived") {
    throw ConfigError("bandwidth-report needs [params] mode = derived");
  }
  ParameterSet p;
  try {
    p = resolve_parameters(ex, 1.0);
  } catch (const InfeasibleParameters& e) {
    err << e.what() << "\n";
    return kExitFailure;
  }
  out << "alpha      T_alpha        L_alpha  B_alpha        gamma_alpha    bound          "
         "B<=bound  eq19\n";
  bool all = true;
  for (double a : alphas) {
    const BandwidthReport r = bandwidth_relation(a, p);
    out << fmt("%-10g", a) << " " << fmt("%-14.6e", r.T_alpha) << " "
        << fmt("%-8.0f", static_cast<double>(r.L_alpha)) << " "
        << fmt("%-14.6e", r.bandwidth) << " " << fmt("%-14.10f", r.gamma) << " "
        << fmt("%-14.6e", r.bound) << " " << (r.holds ? "yes      " : "no       ")
        << (r.period_check.pass ? "pass" : "fail") << "\n";
    all = all && r.holds && r.period_check.pass;
  }
  out << "C0 and C1 are evaluated as printed (C1 carries c2, T_alpha carries c1)\n";
  return all ? kExitOk : kExitFailure;
}

int cmd_solve(const std::string& source, std::ostream& out) {
  const Experiment ex = load_experiment(source, false);
  const CentralizedSolution& s = ex.solution;
  auto vec = [](const Eigen::VectorXd& v) {
    std::string o;
    for (Eigen::Index k = 0; k < v.size(); ++k) o += (k ? " " : "") + format_double(v[k]);
    return o;
  };
  out << "x*              " << vec(s.x_star) << "\n";
  out << "solution set    [" << vec(s.set_lower) << "] .. [" << vec(s.set_upper) << "]\n";
  out << "f(x*)           " << format_double(s.optimal_value) << "\n";
  out << "||grad f(x*)||  " << format_double(s.gradient_norm) << "\n";
  out << "M1              " << format_double(s.M1) << "\n";
  out << "M2              " << format_double(s.M2) << "\n";
  out << "m_f             " << format_double(ex.data.m_f) << "\n";
  out << "sigma2          " << format_double(ex.data.sigma2) << "\n";
  out << "sigmaN          " << format_double(ex.data.sigmaN) << "\n";
  return kExitOk;
}

int cmd_validate(const std::string& source, std::ostream& out, std::ostream& err) {
  const Experiment ex = load_experiment(source, false);
  ParameterSet p;
  try {
    p = resolve_parameters(ex, ex.config.run.alpha);
  } catch (const InfeasibleParameters& e) {
    err << e.what() << "\n";
    return kExitFailure;
  }
  print_params(out, p);
  if (p.mode == ParameterMode::Manual) {
    out << "manual mode: parameters accepted without feasibility derivation\n";
    return kExitOk;
  }
  const std::vector<std::string> issues = self_check(p);
  for (const std::string& n : p.notes) out << "note: " << n << "\n";
  const TCheck c = check_T(p.T, p);
  out << "period predicate lhs " << format_double(c.lhs) << " vs c1 "
      << format_double(*p.c1) << " (slack " << format_double(c.slack) << ")\n";
  for (const std::string& i : issues) err << "violation: " << i << "\n";
  out << (issues.empty() ? "feasible\n" : "infeasible\n");
  return issues.empty() ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantized distributed primal-dual simulator", "qdpd"};
  app.set_version_flag("--version", std::string(library_version()));
  app.require_subcommand(1);

  std::string source, out_dir;
  std::vector<double> alphas{0.5, 1.0, 2.0};
  std::vector<double> bw_alphas{0.25, 0.5, 1.0, 2.0};

  CLI::App* run = app.add_subcommand("run", "Run one experiment and export its outputs");
  run->add_option("source", source, "Config file or manifest.json to replay")->required();
  run->add_option("--out", out_dir, "Output directory (overrides QDPD_OUT and run.output)");

  CLI::App* sweep = app.add_subcommand("sweep-alpha", "Run the config at several gains");
  sweep->add_option("config", source, "Config file")->required();
  sweep->add_option("--alphas", alphas, "Comma-separated gains")->delimiter(',');
  sweep->add_option("--out", out_dir, "Output root directory");

  CLI::App* bw = app.add_subcommand("bandwidth-report", "Tabulate the bandwidth-rate relation");
  bw->add_option("config", source, "Derived-mode config file")->required();
  bw->add_option("--alphas", bw_alphas, "Comma-separated gains")->delimiter(',');

  CLI::App* solve = app.add_subcommand("solve", "Solve the centralized problem only");
  solve->add_option("config", source, "Config file")->required();

  CLI::App* validate = app.add_subcommand("validate", "Check parameter feasibility only");
  validate->add_option("config", source, "Config file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(source, out_dir, out, err);
    if (sweep->parsed()) return cmd_sweep(source, alphas, out_dir, out, err);
    if (bw->parsed()) return cmd_bandwidth(source, bw_alphas, out, err);
    if (solve->parsed()) return cmd_solve(source, out);
    if (validate->parsed()) return cmd_validate(source, out, err);
  } catch (const InfeasibleParameters& e) {
    err << e.what() << "\n";
    return kExitFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace qdpd

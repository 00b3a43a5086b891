#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "qdpd/cli.hpp"
#include "qdpd/errors.hpp"
#include "qdpd/experiment.hpp"
#include "qdpd/export.hpp"

using namespace qdpd;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(QDPD_SOURCE_DIR) / "configs";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qdpd_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  std::ostringstream o, e;
  const int code = run_cli(args, o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("experiment wiring on the quadratic pair") {
    const Experiment ex = build_experiment(load_config(kConfigs / "quadratic_pair.cfg"));
    CHECK(ex.solution.x_star[0] == doctest::Approx((1 * -2.0 + 3 * 4.0) / 4.0).epsilon(1e-10));
    const ExperimentResult r = run_experiment(ex);
    CHECK(r.exit_status == 0);
    CHECK(r.quantized.ok());
    REQUIRE(r.exact);
    CHECK(r.summary.final_max_distance < 1e-4);
    CHECK(r.exact_summary->final_max_distance < 1e-8);
    CHECK(r.diagnostics.size() == r.quantized.trajectory.samples.size());
    CHECK(r.params.L == 63);
  }

  TEST_CASE("manual sweeps scale the range decay with the gain") {
    const Experiment ex = build_experiment(load_config(kConfigs / "quadratic_pair.cfg"));
    CHECK(resolve_parameters(ex, 2.0).decay_per_step == doctest::Approx(0.02));
    CHECK(integrator_config(ex.config, 2.0).alpha == 2.0);
    const auto sweep = sweep_alpha(ex, {0.5, 1.0});
    REQUIRE(sweep.size() == 2);
    CHECK(sweep[0].alpha == 0.5);
    CHECK_THROWS_AS(sweep_alpha(ex, {-1.0}), DomainError);
  }

  TEST_CASE("failed runs carry exit status one") {
    RunConfig c = load_config(kConfigs / "table1.cfg");
    c.run.horizon_periods = 100;
    c.run.compare_exact = false;
    const ExperimentResult r = run_experiment(build_experiment(c));
    CHECK(r.exit_status == 1);
    REQUIRE(r.quantized.failure);
    CHECK(r.quantized.failure->kind == FailureKind::Saturation);
  }

  TEST_CASE("agent count mismatch is a config error") {
    RunConfig c = load_config(kConfigs / "quadratic_pair.cfg");
    c.run.x0 = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(build_experiment(c), ConfigError);
  }

  TEST_CASE("export writes csv and manifest, and the manifest replays identically") {
    const fs::path a = scratch("export_a"), b = scratch("export_b");
    RunConfig c = load_config(kConfigs / "quadratic_pair.cfg");
    c.run.horizon_periods = 300;
    const Experiment ex = build_experiment(c);
    const auto files = export_run(ex, run_experiment(ex), a);
    CHECK(files.size() == 5);
    const std::string header = slurp(a / "trajectory.csv").substr(0, 40);
    CHECK(header.rfind("t,x_1,x_2,lambda_1", 0) == 0);
    const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(manifest["config_hash"] == config_hash(c));
    CHECK(manifest["exit_status"] == 0);
    CHECK(manifest.contains("parameters"));
    CHECK(manifest.contains("oracle"));

    const RunConfig replay = config_from_manifest(a / "manifest.json");
    CHECK(canonical_text(replay) == canonical_text(c));
    const Experiment ex2 = build_experiment(load_run_source(a / "manifest.json"));
    export_run(ex2, run_experiment(ex2), b);
    for (const char* f : {"trajectory.csv", "diagnostics.csv", "trajectory_exact.csv",
                          "diagnostics_exact.csv", "manifest.json"}) {
      CAPTURE(f);
      CHECK(slurp(a / f) == slurp(b / f));
    }
  }

  TEST_CASE("cli exit codes") {
    std::string out, err;
    CHECK(cli({"--help"}, &out) == kExitOk);
    CHECK(out.find("sweep-alpha") != std::string::npos);
    CHECK(cli({"--version"}, &out) == kExitOk);
    CHECK(out.find(library_version()) != std::string::npos);
    CHECK(cli({}) == kExitUsage);
    CHECK(cli({"frobnicate"}) == kExitUsage);
    CHECK(cli({"solve", (kConfigs / "missing.cfg").string()}) == kExitUsage);
    CHECK(cli({"solve", (kConfigs / "table1.cfg").string()}, &out) == kExitOk);
    CHECK(out.find("x*") != std::string::npos);
    CHECK(cli({"validate", (kConfigs / "table1.cfg").string()}, &out) == kExitOk);
    CHECK(cli({"validate", (kConfigs / "table1_derived.cfg").string()}, &out) == kExitOk);
    CHECK(out.find("feasible") != std::string::npos);
    CHECK(cli({"bandwidth-report", (kConfigs / "table1.cfg").string()}) == kExitUsage);
    CHECK(cli({"bandwidth-report", (kConfigs / "table1_derived.cfg").string()}, &out) ==
          kExitOk);
  }

  TEST_CASE("cli run honours --out and QDPD_OUT") {
    const fs::path cfg = scratch("cli_cfg.cfg");
    std::string text = slurp(kConfigs / "quadratic_pair.cfg");
    text.replace(text.find("horizon_periods = 1200"), 22, "horizon_periods = 50");
    std::ofstream(cfg) << text;
    const fs::path flag = scratch("cli_flag"), env = scratch("cli_env");
    CHECK(cli({"run", cfg.string(), "--out", flag.string()}) == kExitOk);
    CHECK(fs::exists(flag / "manifest.json"));
    ::setenv("QDPD_OUT", env.string().c_str(), 1);
    CHECK(cli({"run", cfg.string()}) == kExitOk);
    ::unsetenv("QDPD_OUT");
    CHECK(fs::exists(env / "trajectory.csv"));
    const fs::path bad = scratch("cli_bad.cfg");
    std::ofstream(bad) << "[run]\nnonsense = 1\n";
    std::string err;
    CHECK(cli({"run", bad.string()}, nullptr, &err) == kExitUsage);
    CHECK(err.find("nonsense") != std::string::npos);
  }
}

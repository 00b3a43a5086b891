#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qdpd/analysis.hpp"
#include "qdpd/cli.hpp"
#include "qdpd/codec.hpp"
#include "qdpd/config.hpp"
#include "qdpd/dynamics.hpp"
#include "qdpd/errors.hpp"
#include "qdpd/experiment.hpp"
#include "qdpd/export.hpp"
#include "qdpd/graph.hpp"
#include "qdpd/objective.hpp"
#include "qdpd/params.hpp"
#include "qdpd/quantizer.hpp"

namespace py = pybind11;
using namespace qdpd;

namespace {

py::dict summary_dict(const RunSummary& s) {
  py::dict d;
  d["final_max_distance"] = s.final_max_distance;
  d["final_F_norm"] = s.final_F_norm;
  d["dual_drift"] = s.dual_drift;
  d["rate"] = s.rate ? py::cast(s.rate->exponent) : py::none();
  return d;
}

py::dict trajectory_dict(const TrajectoryRecord& tr) {
  const Eigen::Index rows = static_cast<Eigen::Index>(tr.samples.size());
  const Eigen::Index Nn = static_cast<Eigen::Index>(tr.agents) * tr.dimension;
  Eigen::VectorXd t(rows), e(rows);
  Eigen::MatrixXd x(rows, Nn), lambda(rows, Nn), qx(rows, Nn), ql(rows, Nn);
  std::vector<std::int64_t> bits(rows);
  for (Eigen::Index k = 0; k < rows; ++k) {
    const TrajectorySample& s = tr.samples[k];
    t[k] = s.t;
    e[k] = s.e_norm;
    x.row(k) = s.x.transpose();
    lambda.row(k) = s.lambda.transpose();
    qx.row(k) = s.qx.transpose();
    ql.row(k) = s.qlambda.transpose();
    bits[k] = s.bits_cum;
  }
  py::dict d;
  d["t"] = t;
  d["x"] = x;
  d["lambda"] = lambda;
  d["qx"] = qx;
  d["qlambda"] = ql;
  d["e_norm"] = e;
  d["bits_cum"] = bits;
  return d;
}

py::dict result_dict(const Experiment& ex, const ExperimentResult& r) {
  py::dict d;
  d["exit_status"] = r.exit_status;
  d["failure"] = r.quantized.failure ? py::cast(r.quantized.failure->message) : py::none();
  d["summary"] = summary_dict(r.summary);
  d["trajectory"] = trajectory_dict(r.quantized.trajectory);
  if (r.exact_summary) d["exact_summary"] = summary_dict(*r.exact_summary);
  d["warnings"] = r.warnings;
  d["manifest"] = manifest_text(ex, r);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quantized distributed primal-dual simulator";
  m.attr("__version__") = library_version();

  py::register_exception<Error>(m, "QdpdError");
  py::register_exception<InfeasibleParameters>(m, "InfeasibleParameters");

  py::class_<NetworkGraph>(m, "NetworkGraph")
      .def(py::init([](int n, const std::vector<std::pair<int, int>>& edges) {
             std::vector<Edge> es;
             for (const auto& [u, v] : edges) es.push_back({u, v});
             return NetworkGraph(n, std::move(es));
           }),
           py::arg("node_count"), py::arg("edges"))
      .def_static("ring", &NetworkGraph::ring, py::arg("n"))
      .def_static("complete", &NetworkGraph::complete, py::arg("n"))
      .def_property_readonly("node_count", &NetworkGraph::node_count)
      .def_property_readonly("laplacian", &NetworkGraph::laplacian)
      .def_property_readonly("eigenvalues",
                             [](const NetworkGraph& g) { return g.spectrum().eigenvalues; })
      .def_property_readonly("sigma2", &NetworkGraph::sigma2)
      .def_property_readonly("sigmaN", &NetworkGraph::sigmaN)
      .def("apply_laplacian", &NetworkGraph::apply_laplacian, py::arg("v"),
           py::arg("block_dim") = 1);

  m.def("piecewise_value",
        [](double a, double b, double c, double d, double x) {
          return PiecewiseQuadCost({a, b, c, d}).value(x);
        },
        py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"), py::arg("x"));
  m.def("piecewise_gradient",
        [](double a, double b, double c, double d, double x) {
          return PiecewiseQuadCost({a, b, c, d}).gradient(x);
        },
        py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"), py::arg("x"));
  m.def("table1_coefficients", [] {
    std::vector<std::array<double, 4>> rows;
    for (const auto& r : table1_coefficients()) rows.push_back({r.a, r.b, r.c, r.d});
    return rows;
  });
  m.def("solve_table1", [](double tol) {
    const CentralizedSolution s = solve_centralized(table1_problem(), tol);
    py::dict d;
    d["x_star"] = s.x_star;
    d["set_lower"] = s.set_lower;
    d["set_upper"] = s.set_upper;
    d["optimal_value"] = s.optimal_value;
    d["M1"] = s.M1;
    d["M2"] = s.M2;
    return d;
  }, py::arg("tol") = 1e-12);

  m.def("quantize",
        [](int L, double lower, double upper, double s) {
          return quantize(QuantizerSpec(L), Interval(lower, upper), s);
        },
        py::arg("L"), py::arg("lower"), py::arg("upper"), py::arg("s"));
  m.def("dequantize",
        [](int L, double lower, double upper, int index) {
          return dequantize(QuantizerSpec(L), Interval(lower, upper), index);
        },
        py::arg("L"), py::arg("lower"), py::arg("upper"), py::arg("index"));
  m.def("bandwidth_per_step",
        [](int L, int n, bool zero_suppressed) {
          return bandwidth_per_step(QuantizerSpec(L), n,
                                    zero_suppressed ? BitMode::ZeroSuppressed : BitMode::Full);
        },
        py::arg("L"), py::arg("n"), py::arg("zero_suppressed") = false);
  m.def("pack_frame",
        [](int agent_id, std::int64_t step, const std::vector<int>& payload, int L) {
          Frame f;
          f.agent_id = agent_id;
          f.step = step;
          f.payload = payload;
          f.bit_length = static_cast<int>(payload.size()) * bits_per_index(QuantizerSpec(L));
          const std::vector<std::uint8_t> bytes = pack_bits(f);
          return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        },
        py::arg("agent_id"), py::arg("step"), py::arg("payload"), py::arg("L"));
  m.def("unpack_frame",
        [](py::bytes data, int n, int L) {
          const std::string s = data;
          const std::vector<std::uint8_t> bytes(s.begin(), s.end());
          const Frame f = unpack_bits(bytes, n, QuantizerSpec(L));
          return py::make_tuple(f.agent_id, f.step, f.payload);
        },
        py::arg("data"), py::arg("n"), py::arg("L"));

  m.def("derive_eta", &derive_eta, py::arg("beta"), py::arg("kappa"), py::arg("m_f"),
        py::arg("sigmaN"));
  m.def("derive_rho", &derive_rho, py::arg("eta"), py::arg("kappa"), py::arg("m_f"),
        py::arg("sigmaN"));
  m.def("check_T",
        [](double T, double rho, double eta, double sigmaN, double c1, double alpha) {
          const TCheck c = check_T(T, rho, eta, sigmaN, c1, alpha);
          return py::make_tuple(c.pass, c.lhs, c.slack);
        },
        py::arg("T"), py::arg("rho"), py::arg("eta"), py::arg("sigmaN"), py::arg("c1"),
        py::arg("alpha") = 1.0);

  m.def("canonical_config", [](const std::string& text) {
    return canonical_text(parse_config(text));
  }, py::arg("text"));
  m.def("run_config",
        [](const std::string& text, std::optional<double> alpha) {
          const Experiment ex = build_experiment(parse_config(text));
          ExperimentResult r;
          {
            py::gil_scoped_release release;
            r = run_experiment(ex, alpha);
          }
          return result_dict(ex, r);
        },
        py::arg("text"), py::arg("alpha") = py::none(),
        "Run a config given as text; returns summary, trajectory arrays and manifest.");
  m.def("bandwidth_report",
        [](const std::string& text, const std::vector<double>& alphas) {
          const Experiment ex = build_experiment(parse_config(text));
          const ParameterSet p = resolve_parameters(ex, 1.0);
          py::list rows;
          for (double a : alphas) {
            const BandwidthReport r = bandwidth_relation(a, p);
            py::dict d;
            d["alpha"] = r.alpha;
            d["T_alpha"] = r.T_alpha;
            d["L_alpha"] = r.L_alpha;
            d["bandwidth"] = r.bandwidth;
            d["gamma"] = r.gamma;
            d["bound"] = r.bound;
            d["holds"] = r.holds;
            d["period_check"] = r.period_check.pass;
            rows.append(d);
          }
          return rows;
        },
        py::arg("text"), py::arg("alphas"));
  m.def("cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          const int code = run_cli(args, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}

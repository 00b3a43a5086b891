#include "qdpd/dynamics.hpp"

#include <cmath>
#include <string>

#include "qdpd/errors.hpp"

namespace qdpd {

void IntegratorConfig::validate() const {
  if (substeps < 1) throw DomainError("substeps must be at least 1");
  if (!(alpha > 0) || !std::isfinite(alpha)) throw DomainError("alpha must be positive");
  if (!(blowup_guard > 0)) throw DomainError("blow-up guard must be positive");
}

std::string to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::Saturation: return "saturation";
    case FailureKind::Divergence: return "divergence";
    case FailureKind::Desync: return "desync";
    case FailureKind::Numeric: return "numeric";
    case FailureKind::Range: return "range";
  }
  return "unknown";
}

Eigen::VectorXd stack_state(const std::vector<AgentState>& agents) {
  if (agents.empty()) return {};
  const Eigen::Index n = agents.front().x.size();
  const Eigen::Index N = static_cast<Eigen::Index>(agents.size());
  Eigen::VectorXd z(2 * N * n);
  for (Eigen::Index i = 0; i < N; ++i) {
    z.segment(i * n, n) = agents[i].x;
    z.segment(N * n + i * n, n) = agents[i].lambda;
  }
  return z;
}

namespace {

void check_shapes(const GlobalProblem& problem, const NetworkGraph& graph) {
  if (problem.agent_count() != graph.node_count()) {
    throw ShapeError("problem has " + std::to_string(problem.agent_count()) +
                     " agents, graph has " + std::to_string(graph.node_count()) +
                     " nodes");
  }
}

// Per-agent neighbor sums of the held quantized values:
// dx_i = Σ_j (q^x_i - q^x_j) + Σ_j (q^λ_i - q^λ_j), dl_i = Σ_j (q^x_i - q^x_j).
struct HeldDrive {
  Eigen::VectorXd x_part;
  Eigen::VectorXd lambda_part;
};

HeldDrive held_drive(const NetworkGraph& graph, const std::vector<AgentState>& agents,
                     int n) {
  const int N = graph.node_count();
  HeldDrive d{Eigen::VectorXd::Zero(N * n), Eigen::VectorXd::Zero(N * n)};
  for (int i = 0; i < N; ++i) {
    const AgentState& a = agents[i];
    auto dx = d.x_part.segment(i * n, n);
    auto dl = d.lambda_part.segment(i * n, n);
    for (int j : graph.neighbors(i)) {
      const auto it = a.q_neighbors.find(j);
      if (it == a.q_neighbors.end()) {
        throw ShapeError("agent " + std::to_string(i) + " holds no value for neighbor " +
                         std::to_string(j));
      }
      const Eigen::VectorXd diff_x = a.q_x_self - it->second.first;
      dl += diff_x;
      dx += diff_x + (a.q_lambda_self - it->second.second);
    }
  }
  return d;
}

void local_gradient(const GlobalProblem& problem, int i,
                    const Eigen::Ref<const Eigen::VectorXd>& xi,
                    Eigen::Ref<Eigen::VectorXd> out) {
  problem.cost(i).gradient(xi, out);
  if (!out.allFinite()) {
    throw NumericError("non-finite gradient at agent " + std::to_string(i), i);
  }
}

void check_blowup(const Eigen::VectorXd& z, int N, int n, double guard,
                  std::int64_t step) {
  Eigen::Index at = 0;
  const double peak = z.cwiseAbs().maxCoeff(&at);
  if (!(peak <= guard)) {
    const int agent = static_cast<int>((at % (static_cast<Eigen::Index>(N) * n)) / n);
    throw DivergenceError("state magnitude " + std::to_string(peak) +
                              " exceeded the blow-up guard at step " +
                              std::to_string(step) + " (agent " +
                              std::to_string(agent) + ")",
                          step, agent);
  }
}

}  // namespace

Eigen::VectorXd rhs(const GlobalProblem& problem, const NetworkGraph& graph,
                    const std::vector<AgentState>& agents, double alpha) {
  check_shapes(problem, graph);
  if (static_cast<int>(agents.size()) != graph.node_count()) {
    throw ShapeError("rhs: agent state count does not match the graph");
  }
  const int N = graph.node_count();
  const int n = problem.dimension();
  const HeldDrive d = held_drive(graph, agents, n);
  Eigen::VectorXd out(2 * N * n);
  Eigen::VectorXd g(n);
  for (int i = 0; i < N; ++i) {
    local_gradient(problem, i, agents[i].x, g);
    out.segment(i * n, n) = alpha * (-g - d.x_part.segment(i * n, n));
    out.segment(N * n + i * n, n) = alpha * d.lambda_part.segment(i * n, n);
  }
  return out;
}

Eigen::VectorXd exact_rhs(const GlobalProblem& problem, const NetworkGraph& graph,
                          const Eigen::Ref<const Eigen::VectorXd>& z, double alpha) {
  check_shapes(problem, graph);
  const int Nn = graph.node_count() * problem.dimension();
  if (z.size() != 2 * Nn) throw ShapeError("exact_rhs: state has wrong length");
  const int n = problem.dimension();
  const Eigen::VectorXd Lx = graph.apply_laplacian(z.head(Nn), n);
  const Eigen::VectorXd Ll = graph.apply_laplacian(z.tail(Nn), n);
  Eigen::VectorXd out(2 * Nn);
  Eigen::VectorXd g(n);
  for (int i = 0; i < graph.node_count(); ++i) {
    local_gradient(problem, i, z.segment(i * n, n), g);
    out.segment(i * n, n) = g;
  }
  out.head(Nn) = alpha * (-out.head(Nn) - Lx - Ll);
  out.tail(Nn) = alpha * Lx;
  return out;
}

Eigen::VectorXd rk4_integrate(
    const VectorField& f, Eigen::VectorXd y, double t0, double duration, int steps,
    const std::function<void(double, const Eigen::VectorXd&)>& observer) {
  if (steps < 1) throw DomainError("rk4_integrate needs at least one step");
  const double h = duration / steps;
  Eigen::VectorXd k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
  for (int s = 0; s < steps; ++s) {
    const double t = t0 + s * h;
    f(t, y, k1);
    tmp = y + 0.5 * h * k1;
    f(t + 0.5 * h, tmp, k2);
    tmp = y + 0.5 * h * k2;
    f(t + 0.5 * h, tmp, k3);
    tmp = y + h * k3;
    f(t + h, tmp, k4);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (observer) observer(t0 + (s + 1) * h, y);
  }
  return y;
}

void integrate_interval(const GlobalProblem& problem, const NetworkGraph& graph,
                        std::vector<AgentState>& agents, const IntegratorConfig& cfg,
                        double T, double t0, std::int64_t step,
                        std::vector<DenseSample>* dense) {
  cfg.validate();
  if (!(T > 0)) throw DomainError("sampling period must be positive");
  check_shapes(problem, graph);
  const int N = graph.node_count();
  const int n = problem.dimension();
  const int Nn = N * n;
  const HeldDrive d = held_drive(graph, agents, n);
  const double alpha = cfg.alpha;

  Eigen::VectorXd g(n);
  VectorField field = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    for (int i = 0; i < N; ++i) {
      local_gradient(problem, i, y.segment(i * n, n), g);
      dy.segment(i * n, n) = alpha * (-g - d.x_part.segment(i * n, n));
    }
    dy.tail(Nn) = alpha * d.lambda_part;
  };
  auto observer = [&](double t, const Eigen::VectorXd& y) {
    check_blowup(y, N, n, cfg.blowup_guard, step);
    if (dense) dense->push_back({t, y});
  };

  const Eigen::VectorXd z = rk4_integrate(field, stack_state(agents), t0, T,
                                          cfg.substeps, observer);
  for (int i = 0; i < N; ++i) {
    agents[i].x = z.segment(i * n, n);
    agents[i].lambda = z.segment(Nn + i * n, n);
  }
}

Eigen::VectorXd initial_dual(const NetworkGraph& graph,
                             const Eigen::Ref<const Eigen::VectorXd>& qx0, int n) {
  return graph.apply_laplacian(qx0, n);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> initial_state(
    const NetworkGraph& graph, const Scheme& scheme,
    const Eigen::Ref<const Eigen::VectorXd>& x0, int n) {
  const int N = graph.node_count();
  if (x0.size() != N * n) {
    throw ShapeError("x(0) has " + std::to_string(x0.size()) + " entries, expected " +
                     std::to_string(N * n));
  }
  const RangeState r0 = initial_range(2 * n, scheme.schedule, scheme.spec);
  Eigen::VectorXd qx(N * n);
  for (int i = 0; i < N; ++i) {
    for (int c = 0; c < n; ++c) {
      const Interval range = r0.coordinate_range(c);
      const double s = x0[i * n + c];
      const QuantizeOutcome out = try_quantize(scheme.spec, range, s);
      if (out.saturated) {
        throw EncoderSaturationError(
            "initial state saturated: agent " + std::to_string(i) + ", coordinate " +
                std::to_string(c) + " value " + std::to_string(s),
            i, 0, c);
      }
      qx[i * n + c] = dequantize(scheme.spec, range, out.index);
    }
  }
  Eigen::VectorXd z0(2 * N * n);
  z0.head(N * n) = x0;
  z0.tail(N * n) = initial_dual(graph, qx, n);
  return {std::move(qx), std::move(z0)};
}

RunOutcome simulate(const GlobalProblem& problem, const NetworkGraph& graph,
                    const Scheme& scheme, const IntegratorConfig& cfg,
                    std::int64_t horizon, const Eigen::Ref<const Eigen::VectorXd>& x0) {
  check_shapes(problem, graph);
  cfg.validate();
  if (horizon < 1) throw DomainError("horizon must be at least one period");
  const int N = graph.node_count();
  const int n = problem.dimension();
  const int Nn = N * n;
  const double T = scheme.schedule.period();

  RunOutcome outcome;
  TrajectoryRecord& rec = outcome.trajectory;
  rec.agents = N;
  rec.dimension = n;
  rec.period = T;
  rec.bits_per_step = bandwidth_per_step(scheme.spec, n, BitMode::Full);
  rec.samples.reserve(static_cast<std::size_t>(horizon) + 1);

  try {
    const auto [qx0, z0] = initial_state(graph, scheme, x0, n);
    std::vector<Encoder> encoders;
    std::vector<std::map<int, Decoder>> decoders(N);
    std::vector<AgentState> agents(N);
    encoders.reserve(N);
    for (int i = 0; i < N; ++i) {
      encoders.emplace_back(i, n, scheme.spec, scheme.schedule);
      for (int j : graph.neighbors(i)) {
        decoders[i].emplace(j, Decoder(j, n, scheme.spec, scheme.schedule));
      }
      agents[i].x = z0.segment(i * n, n);
      agents[i].lambda = z0.segment(Nn + i * n, n);
    }

    std::vector<std::vector<std::uint8_t>> wire(N);
    Eigen::VectorXd zi(2 * n);
    for (std::int64_t k = 0; k <= horizon; ++k) {
      for (int i = 0; i < N; ++i) {
        zi << agents[i].x, agents[i].lambda;
        wire[i] = pack_bits(encoders[i].encode(zi));
        const Eigen::VectorXd& q = encoders[i].last_q();
        agents[i].q_x_self = q.head(n);
        agents[i].q_lambda_self = q.tail(n);
      }
      for (int i = 0; i < N; ++i) {
        for (auto& [j, decoder] : decoders[i]) {
          const Eigen::VectorXd& q = decoder.decode(unpack_bits(wire[j], n, scheme.spec));
          agents[i].q_neighbors[j] = {q.head(n), q.tail(n)};
        }
      }

      TrajectorySample s;
      s.t = static_cast<double>(k) * T;
      s.x.resize(Nn);
      s.lambda.resize(Nn);
      s.qx.resize(Nn);
      s.qlambda.resize(Nn);
      for (int i = 0; i < N; ++i) {
        s.x.segment(i * n, n) = agents[i].x;
        s.lambda.segment(i * n, n) = agents[i].lambda;
        s.qx.segment(i * n, n) = agents[i].q_x_self;
        s.qlambda.segment(i * n, n) = agents[i].q_lambda_self;
      }
      s.e_norm = std::sqrt((s.x - s.qx).squaredNorm() + (s.lambda - s.qlambda).squaredNorm());
      s.bits_cum = k * rec.bits_per_step * N;
      rec.samples.push_back(std::move(s));

      if (k < horizon) {
        integrate_interval(problem, graph, agents, cfg, T, static_cast<double>(k) * T, k);
      }
    }
  } catch (const EncoderSaturationError& e) {
    outcome.failure = RunFailure{FailureKind::Saturation, e.what(), e.step(), e.agent(),
                                 e.coordinate()};
  } catch (const DivergenceError& e) {
    outcome.failure = RunFailure{FailureKind::Divergence, e.what(), e.step(), e.agent(), -1};
  } catch (const DesyncError& e) {
    outcome.failure =
        RunFailure{FailureKind::Desync, e.what(), e.frame_step(), e.agent(), -1};
  } catch (const NumericError& e) {
    outcome.failure = RunFailure{FailureKind::Numeric, e.what(),
                                 static_cast<std::int64_t>(rec.samples.size()) - 1,
                                 e.agent(), -1};
  } catch (const DomainError& e) {
    outcome.failure = RunFailure{FailureKind::Range, e.what(),
                                 static_cast<std::int64_t>(rec.samples.size()), -1, -1};
  }
  return outcome;
}

namespace {

[[noreturn]] void rethrow(const RunFailure& f) {
  switch (f.kind) {
    case FailureKind::Saturation:
      throw EncoderSaturationError(f.message, f.agent, f.step, f.coordinate);
    case FailureKind::Divergence:
      throw DivergenceError(f.message, f.step, f.agent);
    case FailureKind::Desync:
      throw DesyncError(f.message, f.agent, f.step, f.step);
    case FailureKind::Numeric:
      throw NumericError(f.message, f.agent);
    case FailureKind::Range:
      break;
  }
  throw DomainError(f.message);
}

}  // namespace

TrajectoryRecord run(const GlobalProblem& problem, const NetworkGraph& graph,
                     const Scheme& scheme, const IntegratorConfig& cfg,
                     std::int64_t horizon, const Eigen::Ref<const Eigen::VectorXd>& x0) {
  RunOutcome out = simulate(problem, graph, scheme, cfg, horizon, x0);
  if (out.failure) rethrow(*out.failure);
  return std::move(out.trajectory);
}

RunOutcome simulate_exact(const GlobalProblem& problem, const NetworkGraph& graph,
                          double T, const IntegratorConfig& cfg, std::int64_t horizon,
                          const Eigen::Ref<const Eigen::VectorXd>& x0) {
  check_shapes(problem, graph);
  cfg.validate();
  if (!(T > 0)) throw DomainError("sampling period must be positive");
  if (horizon < 1) throw DomainError("horizon must be at least one period");
  const int N = graph.node_count();
  const int n = problem.dimension();
  const int Nn = N * n;
  if (x0.size() != Nn) throw ShapeError("x(0) has the wrong length");

  RunOutcome outcome;
  TrajectoryRecord& rec = outcome.trajectory;
  rec.agents = N;
  rec.dimension = n;
  rec.period = T;
  rec.bits_per_step = 0;
  rec.samples.reserve(static_cast<std::size_t>(horizon) + 1);

  Eigen::VectorXd z(2 * Nn);
  z.head(Nn) = x0;
  z.tail(Nn) = graph.apply_laplacian(x0, n);
  VectorField field = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy = exact_rhs(problem, graph, y, cfg.alpha);
  };

  try {
    for (std::int64_t k = 0; k <= horizon; ++k) {
      TrajectorySample s;
      s.t = static_cast<double>(k) * T;
      s.x = z.head(Nn);
      s.lambda = z.tail(Nn);
      s.qx = s.x;
      s.qlambda = s.lambda;
      rec.samples.push_back(std::move(s));
      if (k < horizon) {
        z = rk4_integrate(field, z, static_cast<double>(k) * T, T, cfg.substeps,
                          [&](double, const Eigen::VectorXd& y) {
                            check_blowup(y, N, n, cfg.blowup_guard, k);
                          });
      }
    }
  } catch (const DivergenceError& e) {
    outcome.failure = RunFailure{FailureKind::Divergence, e.what(), e.step(), e.agent(), -1};
  } catch (const NumericError& e) {
    outcome.failure = RunFailure{FailureKind::Numeric, e.what(),
                                 static_cast<std::int64_t>(rec.samples.size()) - 1,
                                 e.agent(), -1};
  }
  return outcome;
}

}  // namespace qdpd

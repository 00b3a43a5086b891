#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qdpd/codec.hpp"
#include "qdpd/graph.hpp"
#include "qdpd/objective.hpp"
#include "qdpd/quantizer.hpp"

namespace qdpd {

struct IntegratorConfig {
  int substeps = 50;           ///< RK4 steps per sampling period
  double alpha = 1.0;          ///< gain on the whole vector field
  double blowup_guard = 1e9;   ///< divergence threshold on ‖z‖∞

  void validate() const;
};

/// One agent's local view: its own (x, λ), the quantized values it holds for
/// itself, and the held values decoded from each neighbor.
struct AgentState {
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;
  Eigen::VectorXd q_x_self;
  Eigen::VectorXd q_lambda_self;
  std::map<int, std::pair<Eigen::VectorXd, Eigen::VectorXd>> q_neighbors;
};

/// Stacked z = [x; λ] (2Nn) from per-agent states.
Eigen::VectorXd stack_state(const std::vector<AgentState>& agents);

/// Time derivative [ẋ; λ̇] (stacked, 2Nn) of the quantized flow:
/// ẋ_i = α[-∇f_i(x_i) - Σ_j (q^x_i - q^x_j) - Σ_j (q^λ_i - q^λ_j)],
/// λ̇_i = α Σ_j (q^x_i - q^x_j). Throws NumericError on a non-finite gradient.
Eigen::VectorXd rhs(const GlobalProblem& problem, const NetworkGraph& graph,
                    const std::vector<AgentState>& agents, double alpha);

/// Unquantized flow on stacked z: ẋ = α[-∇f(x) - L x - L λ], λ̇ = α L x.
Eigen::VectorXd exact_rhs(const GlobalProblem& problem, const NetworkGraph& graph,
                          const Eigen::Ref<const Eigen::VectorXd>& z, double alpha);

using VectorField =
    std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy)>;

/// Classical fixed-step RK4 over [t0, t0 + duration] in `steps` equal steps.
/// `observer`, when set, is called after every step with (t, y).
Eigen::VectorXd rk4_integrate(
    const VectorField& f, Eigen::VectorXd y, double t0, double duration, int steps,
    const std::function<void(double, const Eigen::VectorXd&)>& observer = {});

struct DenseSample {
  double t;
  Eigen::VectorXd z;
};

/// Advance every agent over one sampling period with all held q values fixed.
/// Returns intra-interval samples when `dense` is set. Throws DivergenceError
/// (with `step` and the offending agent) when ‖z‖∞ exceeds the guard.
void integrate_interval(const GlobalProblem& problem, const NetworkGraph& graph,
                        std::vector<AgentState>& agents, const IntegratorConfig& cfg,
                        double T, double t0, std::int64_t step,
                        std::vector<DenseSample>* dense = nullptr);

/// Communication settings for a run: quantizer and range schedule (which
/// carries the sampling period).
struct Scheme {
  QuantizerSpec spec;
  LengthSchedule schedule;
};

struct TrajectorySample {
  double t = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;
  Eigen::VectorXd qx;
  Eigen::VectorXd qlambda;
  double e_norm = 0.0;
  std::int64_t bits_cum = 0;
};

struct TrajectoryRecord {
  int agents = 0;
  int dimension = 0;
  double period = 0.0;
  int bits_per_step = 0;  ///< full-mode bits per agent per sampling instant
  std::vector<TrajectorySample> samples;
};

enum class FailureKind { Saturation, Divergence, Desync, Numeric, Range };

std::string to_string(FailureKind kind);

struct RunFailure {
  FailureKind kind;
  std::string message;
  std::int64_t step = -1;
  int agent = -1;
  int coordinate = -1;
};

struct RunOutcome {
  TrajectoryRecord trajectory;       ///< samples recorded up to the failure
  std::optional<RunFailure> failure;
  bool ok() const noexcept { return !failure.has_value(); }
};

/// Algorithm 1: quantize x(0), build λ(0) = Σ_j (q^x_i(0) - q^x_j(0)), then for
/// k = 0..horizon encode, exchange, hold and integrate. Samples are recorded at
/// every sampling instant kT, k = 0..horizon. Failures end the run and are
/// reported in the outcome rather than thrown.
RunOutcome simulate(const GlobalProblem& problem, const NetworkGraph& graph,
                    const Scheme& scheme, const IntegratorConfig& cfg,
                    std::int64_t horizon, const Eigen::Ref<const Eigen::VectorXd>& x0);

/// As simulate, but rethrows the failure as the matching exception type.
TrajectoryRecord run(const GlobalProblem& problem, const NetworkGraph& graph,
                     const Scheme& scheme, const IntegratorConfig& cfg,
                     std::int64_t horizon, const Eigen::Ref<const Eigen::VectorXd>& x0);

/// Exact-communication PD flow sampled at kT, with λ(0) = L x(0) and q = z.
RunOutcome simulate_exact(const GlobalProblem& problem, const NetworkGraph& graph,
                          double T, const IntegratorConfig& cfg, std::int64_t horizon,
                          const Eigen::Ref<const Eigen::VectorXd>& x0);

/// λ(0) per Algorithm 1 from the initial quantized primal values.
Eigen::VectorXd initial_dual(const NetworkGraph& graph,
                             const Eigen::Ref<const Eigen::VectorXd>& qx0, int n);

/// Quantize x(0) inside P(0) and return q^x(0) together with the full initial
/// state z(0) = [x(0); λ(0)]. Throws EncoderSaturationError.
std::pair<Eigen::VectorXd, Eigen::VectorXd> initial_state(
    const NetworkGraph& graph, const Scheme& scheme,
    const Eigen::Ref<const Eigen::VectorXd>& x0, int n);

}  // namespace qdpd

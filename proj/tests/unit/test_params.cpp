#include <cmath>

#include "doctest.h"
#include "qdpd/errors.hpp"
#include "qdpd/params.hpp"

using namespace qdpd;

namespace {

ProblemData small_data() {
  ProblemData d;
  d.N = 12;
  d.n = 1;
  d.m_f = 2.0;
  d.sigma2 = 2.0 - std::sqrt(3.0);
  d.sigmaN = 4.0;
  d.M1 = 0.5;
  d.M2 = 0.25;
  return d;
}

ProblemData table1_data() {
  return describe(table1_problem(), NetworkGraph::ring(12), solve_centralized(table1_problem()));
}

Eigen::VectorXd table1_x0() {
  Eigen::VectorXd x0(12);
  x0 << -9, 4, -9, -9, 0, -8, 6, 6, 4, -7, 3, 0;
  return x0;
}

DerivationInputs fixture_inputs() {
  DerivationInputs in;
  in.kappa = 0.01;
  in.beta = 0.5;
  in.c1 = 0.4;
  in.c2 = 0.1;
  in.rho0 = 1.5;
  return in;
}

// Left side of the period predicate, written from its displayed form.
double period_lhs(double T, double rho, double eta, double sN, double alpha) {
  const double sbar = std::sqrt((3.0 + std::sqrt(5.0)) / 2.0) * sN;
  return (std::exp(alpha * sbar * T) - 1.0) * (std::exp(alpha * eta / 2.0 * T) - 1.0) * rho /
         alpha;
}

}  // namespace

TEST_SUITE("params") {
  TEST_CASE("eta formula and guards") {
    CHECK(derive_eta(0.5, 1.0, 2.0, 4.0) == doctest::Approx(0.5 / 26.0).epsilon(1e-15));
    CHECK(derive_eta(0.5, 0.2, 2.0, 4.0) > derive_eta(0.5, 0.4, 2.0, 4.0));
    CHECK_THROWS_AS(derive_eta(0.0, 1.0, 2.0, 4.0), DomainError);
    CHECK_THROWS_AS(derive_eta(1.0, 1.0, 2.0, 4.0), DomainError);
    CHECK_THROWS_AS(derive_eta(0.5, -1.0, 2.0, 4.0), DomainError);
  }

  TEST_CASE("rho formula, fixture value and infeasibility") {
    const double eta1 = derive_eta(0.5, 1.0, 2.0, 4.0);
    try {
      derive_rho(eta1, 1.0, 2.0, 4.0);
      FAIL("expected infeasibility");
    } catch (const InfeasibleParameters& e) {
      CHECK(e.margin() < 0);
      CHECK(e.inequality().find("sigma_N") != std::string::npos);
    }
    const double kappa = 0.05, m = 2.0, s = 4.0;
    const double eta = 0.5 / (kappa * kappa * (m + 6 * s));
    const double rad = s - s * kappa * kappa * (eta + 4) * (m + 4 * s);
    const double oracle = std::sqrt(2.0) * (6 * s + 2 * m) * kappa *
                          std::sqrt((m + 4 * s) * (4 * s + 11)) /
                          (eta * std::sqrt(3 + std::sqrt(5.0)) * std::sqrt(rad));
    const double rho = derive_rho(derive_eta(0.5, kappa, m, s), kappa, m, s);
    CHECK(rho == doctest::Approx(oracle).epsilon(1e-14));
    CHECK(rho > 0);
    CHECK(std::isfinite(rho));
    // Recorded fixture.
    CHECK(rho == doctest::Approx(1.801163787).epsilon(1e-9));
  }

  TEST_CASE("period predicate limits and bisection boundary") {
    const double eta = 2.0, rho = 3.0, sN = 4.0, c1 = 0.3;
    CHECK(check_T(1e-12, rho, eta, sN, c1, 1.0).pass);
    CHECK(check_T(5.0, rho, eta, sN, c1, 1e-6).pass);
    CHECK_FALSE(check_T(5.0, rho, eta, sN, c1, 1.0).pass);
    const TCheck c = check_T(0.1, rho, eta, sN, c1, 0.7);
    CHECK(c.lhs == doctest::Approx(period_lhs(0.1, rho, eta, sN, 0.7)).epsilon(1e-13));
    CHECK(c.slack == doctest::Approx(c1 - c.lhs));
    const double Tmax = max_admissible_T(rho, eta, sN, c1, 1.0);
    CHECK(std::abs(check_T(Tmax, rho, eta, sN, c1, 1.0).slack) < 1e-12);
    CHECK(check_T(Tmax, rho, eta, sN, c1, 1.0).pass);
    CHECK_FALSE(check_T(Tmax * (1 + 1e-9), rho, eta, sN, c1, 1.0).pass);
  }

  TEST_CASE("l0 radicand guard and linearity in M0") {
    const ProblemData d = small_data();
    CHECK_THROWS_AS(derive_l0(d, 1.0, 0.02, 0.4, 10.0, 0.01, 1.0), InfeasibleParameters);
    const double kappa = 0.05, eta = derive_eta(0.5, 0.05, 2.0, 4.0);
    const double a = derive_l0(d, kappa, eta, 0.4, 10.0, 0.01, 1.0);
    const double b = derive_l0(d, kappa, eta, 0.4, 20.0, 0.01, 1.0);
    CHECK(b == doctest::Approx(2 * a).epsilon(1e-14));
    const double sbar = std::sqrt((3 + std::sqrt(5.0)) / 2) * 4.0;
    const double oracle = std::sqrt(2.0) * 0.4 * 10.0 / (kappa * 4.0) *
                          std::sqrt((3 - kappa * kappa * (3 * eta + 4) * (2.0 + 24.0)) /
                                    (12 * (48.0 + 33.0))) *
                          std::exp(-eta / 2 * 0.01 - sbar * 0.01);
    CHECK(a == doctest::Approx(oracle).epsilon(1e-14));
    const double M0a = derive_M0(d, 1.0, 2.0), M0b = derive_M0(d, 2.0, 2.0);
    CHECK(M0b - M0a == doctest::Approx(std::sqrt(24.0)).epsilon(1e-14));
  }

  TEST_CASE("M prime formula") {
    const ProblemData d = small_data();
    const double r = std::sqrt(12.0);
    CHECK(derive_Mprime(d, 6.0) ==
          doctest::Approx(6.0 / r + (r / d.sigma2 + r) * 0.5 + r * 0.25).epsilon(1e-14));
  }

  TEST_CASE("level bound and its small-gain limit") {
    const ProblemData d = small_data();
    CHECK(derive_L(d, 0.4, 1e-9, 1.0, 1.0, 0.01, 1e-12) ==
          static_cast<int>(std::ceil(std::sqrt(24.0) / 0.4)));
    CHECK(std::sqrt(24.0) / 0.4 == doctest::Approx(12.247).epsilon(1e-4));
    CHECK(derive_L(d, 0.4, 100.0, 1.0, 1.0, 0.01, 1.0) == 200);
  }

  TEST_CASE("derived set is self-consistent on the twelve-agent fixture") {
    const ProblemData d = table1_data();
    CHECK(d.m_f == 118.0);
    CHECK(d.sigmaN == doctest::Approx(4.0));
    const ParameterSet p = derive_parameters(d, NetworkGraph::ring(12), table1_x0(), fixture_inputs());
    CHECK(self_check(p).empty());
    CHECK(*p.eta == doctest::Approx(0.5 / (1e-4 * 142.0)).epsilon(1e-14));
    CHECK(p.T == doctest::Approx(0.5 * max_admissible_T(*p.rho, *p.eta, 4.0, 0.4, 1.0)));
    CHECK(p.decay_per_step == doctest::Approx(*p.eta / 2 * p.T).epsilon(1e-14));
    CHECK(p.l0 == doctest::Approx(derive_l0(d, 0.01, *p.eta, 0.1, *p.M0, p.T, 1.0)).epsilon(1e-14));
    CHECK(*p.M >= table1_x0().lpNorm<Eigen::Infinity>());
    CHECK(p.L >= derive_L(d, 0.1, *p.M0, p.l0, *p.eta, p.T, 1.0));
    CHECK(!p.notes.empty());
    const ParameterSet again =
        derive_parameters(d, NetworkGraph::ring(12), table1_x0(), fixture_inputs());
    CHECK(again.l0 == p.l0);
    CHECK(again.L == p.L);
    CHECK(again.T == p.T);
  }

  TEST_CASE("derived inputs are validated") {
    const ProblemData d = table1_data();
    DerivationInputs in = fixture_inputs();
    in.c2 = 0.7;
    CHECK_THROWS_AS(derive_parameters(d, NetworkGraph::ring(12), table1_x0(), in), DomainError);
    in = fixture_inputs();
    in.rho0 = 1.0;
    CHECK_THROWS_AS(derive_parameters(d, NetworkGraph::ring(12), table1_x0(), in), DomainError);
    in = fixture_inputs();
    in.kappa = 0.2;
    CHECK_THROWS_AS(derive_parameters(d, NetworkGraph::ring(12), table1_x0(), in),
                    InfeasibleParameters);
    in = fixture_inputs();
    in.T = 10.0;
    CHECK_THROWS_AS(derive_parameters(d, NetworkGraph::ring(12), table1_x0(), in),
                    InfeasibleParameters);
    in = fixture_inputs();
    in.L = 2;
    CHECK_THROWS_AS(derive_parameters(d, NetworkGraph::ring(12), table1_x0(), in),
                    InfeasibleParameters);
  }

  TEST_CASE("bandwidth relation against a direct evaluation") {
    const ProblemData d = table1_data();
    const ParameterSet p = derive_parameters(d, NetworkGraph::ring(12), table1_x0(), fixture_inputs());
    const double eta = *p.eta, rho = *p.rho, s5 = std::sqrt(5.0);
    for (double alpha : {0.25, 0.5, 1.0, 2.0}) {
      const BandwidthReport r = bandwidth_relation(alpha, p);
      const double lng = alpha * eta / 2;
      const double k = std::sqrt(24 + 8 * s5) * 4.0 + 2 * eta;
      const double T = 1.0 / (k / (2 * eta * std::log(1.5)) * lng + 2 * 0.4 / (rho * 1.5 * eta));
      CHECK(r.T_alpha == doctest::Approx(T).epsilon(1e-14));
      CHECK(r.gamma == doctest::Approx(std::exp(lng)).epsilon(1e-14));
      const double C0 = (1 + std::sqrt(6 + s5) * 4.0 / eta) / std::log(2.0) +
                        k / (eta * std::log(1.5)) * (std::log2(24.0) - 2 * std::log2(0.1));
      const double C1 = (0.5 * std::log2(24.0) - std::log2(0.1)) * 2 * 0.1 / (rho * 1.5 * eta);
      CHECK(r.C0 == doctest::Approx(C0).epsilon(1e-13));
      CHECK(r.C1 == doctest::Approx(C1).epsilon(1e-13));
      CHECK(r.bandwidth == doctest::Approx(std::log2(r.L_alpha) / T).epsilon(1e-13));
      CHECK(r.period_check.lhs ==
            doctest::Approx(period_lhs(T, rho, eta, 4.0, alpha)).epsilon(1e-12));
    }
    CHECK(bandwidth_relation(1.0, p).gamma == doctest::Approx(std::exp(eta / 2)));
  }

  TEST_CASE("manual mode keeps the supplied values") {
    const ProblemData d = table1_data();
    const ParameterSet p = manual_mode(d, 0.05, 0.8, 0.1, 67);
    CHECK(p.schedule().length(3) == doctest::Approx(0.8 * std::exp(-0.3)).epsilon(1e-15));
    CHECK(p.quantizer().level_count() == 68);
    CHECK(!p.eta);
    CHECK(self_check(p).empty());
    CHECK_THROWS_AS(manual_mode(d, 0.0, 0.8, 0.1, 67), DomainError);
    CHECK_THROWS_AS(manual_mode(d, 0.05, 0.8, 0.1, 0), DomainError);
    CHECK_THROWS_AS(bandwidth_relation(1.0, p), DomainError);
  }
}

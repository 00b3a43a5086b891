#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "qdpd/errors.hpp"
#include "qdpd/quantizer.hpp"

using namespace qdpd;

namespace {

// Brute force over every grid point; ties resolved to the smaller index.
int brute_force_index(int L, double l, double u, double s) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= L; ++i) {
    const double d = std::abs(l + i * (u - l) / L - s);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

TEST_SUITE("quantizer") {
  TEST_CASE("nearest grid point examples") {
    const QuantizerSpec spec(4);
    const Interval r(0.0, 1.0);
    CHECK(quantize(spec, r, 0.3) == 1);
    CHECK(quantize(spec, r, 0.5) == 2);
    CHECK(quantize(spec, r, 0.125) == 0);
    CHECK(dequantize(spec, r, 3) == 0.75);
  }

  TEST_CASE("matches brute force and the error bound exhaustively for small L") {
    for (int L = 1; L <= 8; ++L) {
      const QuantizerSpec spec(L);
      const Interval r(-1.5, 2.5);
      const double bound = r.width() / (2.0 * L);
      int prev = 0;
      for (int k = 0; k <= 4000; ++k) {
        const double s = r.lower + k * r.width() / 4000.0;
        const int i = quantize(spec, r, s);
        const int oracle = brute_force_index(L, r.lower, r.upper, s);
        // Float grids make exact midpoints ambiguous by one ulp.
        if (i != oracle) {
          const double gi = dequantize(spec, r, i), go = dequantize(spec, r, oracle);
          CHECK(std::abs(std::abs(gi - s) - std::abs(go - s)) < 1e-12);
        }
        CHECK(std::abs(dequantize(spec, r, i) - s) <= bound * (1 + 1e-12));
        CHECK(i >= prev);
        prev = i;
      }
      for (int i = 0; i <= L; ++i) {
        CHECK(quantize(spec, r, dequantize(spec, r, i)) == i);
      }
    }
  }

  TEST_CASE("randomized error bound, monotonicity and idempotence for large L") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> Ld(9, 5000);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int trial = 0; trial < 200; ++trial) {
      const int L = Ld(rng);
      double a = u(rng), b = u(rng);
      if (a > b) std::swap(a, b);
      const QuantizerSpec spec(L);
      const Interval r(a, b);
      std::uniform_real_distribution<double> in(a, b);
      for (int s = 0; s < 200; ++s) {
        const double x = in(rng), y = in(rng);
        const int ix = quantize(spec, r, x), iy = quantize(spec, r, y);
        CHECK(std::abs(dequantize(spec, r, ix) - x) <= r.width() / (2.0 * L) * (1 + 1e-9));
        if (x <= y) CHECK(ix <= iy);
        const double g = dequantize(spec, r, ix);
        CHECK(quantize(spec, r, g) == ix);
      }
    }
  }

  TEST_CASE("L = 67 error bound on random inputs") {
    const QuantizerSpec spec(67);
    const Interval r(-26.8, 26.8);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> in(r.lower, r.upper);
    for (int s = 0; s < 10000; ++s) {
      const double x = in(rng);
      const int i = quantize(spec, r, x);
      CHECK(i == brute_force_index(67, r.lower, r.upper, x));
      CHECK(std::abs(dequantize(spec, r, i) - x) <= r.width() / (2.0 * 67) * (1 + 1e-12));
    }
  }

  TEST_CASE("ties go to the smaller index") {
    const QuantizerSpec spec(2);
    const Interval r(0.0, 4.0);
    CHECK(quantize(spec, r, 1.0) == 0);
    CHECK(quantize(spec, r, 3.0) == 1);
  }

  TEST_CASE("half-cell slack clamps and beyond it saturates") {
    const QuantizerSpec spec(4);
    const Interval r(0.0, 1.0);
    CHECK(quantize(spec, r, -0.125) == 0);
    CHECK(quantize(spec, r, 1.125) == 4);
    const QuantizeOutcome low = try_quantize(spec, r, -0.2);
    CHECK(low.saturated);
    CHECK(low.index == 0);
    const QuantizeOutcome high = try_quantize(spec, r, 7.0);
    CHECK(high.saturated);
    CHECK(high.index == 4);
    try {
      quantize(spec, r, 2.0);
      FAIL("expected saturation");
    } catch (const SaturationError& e) {
      CHECK(e.clamped_index() == 4);
      CHECK(e.value() == 2.0);
    }
    CHECK(try_quantize(spec, r, std::nan("")).saturated);
  }

  TEST_CASE("degenerate ranges map to index zero") {
    const QuantizerSpec spec(5);
    const Interval r(2.0, 2.0);
    CHECK(quantize(spec, r, 2.0) == 0);
    CHECK(dequantize(spec, r, 0) == 2.0);
  }

  TEST_CASE("vector quantization reports every saturated coordinate") {
    const QuantizerSpec spec(4);
    const std::vector<Interval> ranges(3, Interval(0.0, 1.0));
    const std::vector<double> ok{0.1, 0.5, 0.9};
    CHECK(quantize_vector(spec, ranges, ok) == std::vector<int>{0, 2, 4});
    const std::vector<double> bad{5.0, 0.5, -3.0};
    try {
      quantize_vector(spec, ranges, bad);
      FAIL("expected saturation");
    } catch (const VectorSaturationError& e) {
      CHECK(e.coordinates() == std::vector<int>{0, 2});
      CHECK(e.clamped_indices() == std::vector<int>{4, 2, 0});
    }
    CHECK_THROWS_AS(quantize_vector(spec, ranges, std::vector<double>{1.0}), ShapeError);
  }

  TEST_CASE("invalid arguments") {
    CHECK_THROWS_AS(QuantizerSpec(0), DomainError);
    CHECK_THROWS_AS(Interval(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(Interval(0.0, std::numeric_limits<double>::infinity()), DomainError);
    CHECK_THROWS_AS(dequantize(QuantizerSpec(4), Interval(0, 1), 5), CodecError);
    CHECK_THROWS_AS(dequantize(QuantizerSpec(4), Interval(0, 1), -1), CodecError);
  }
}

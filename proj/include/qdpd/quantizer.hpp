#pragma once

#include <span>
#include <vector>

namespace qdpd {

/// Uniform grid of L+1 points spanning a closed interval.
struct QuantizerSpec {
  int L = 1;  ///< level count minus one; the grid has L+1 points

  explicit QuantizerSpec(int levels_minus_one);
  int level_count() const noexcept { return L + 1; }
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  Interval() = default;
  Interval(double l, double u);
  double width() const noexcept { return upper - lower; }
};

struct QuantizeOutcome {
  int index = 0;
  bool saturated = false;  ///< input beyond the half-cell slack; index clamped
};

/// Nearest grid index to s (ties to the smaller index). Inputs within half a
/// cell outside [l, u] clamp silently; anything further is flagged saturated.
/// A zero-width range maps every input to index 0.
QuantizeOutcome try_quantize(const QuantizerSpec& spec, const Interval& range,
                             double s) noexcept;

/// As try_quantize, but throws SaturationError (carrying the clamped index).
int quantize(const QuantizerSpec& spec, const Interval& range, double s);

/// l + index (u - l) / L. Throws CodecError for indices outside [0, L].
double dequantize(const QuantizerSpec& spec, const Interval& range, int index);

/// Coordinatewise quantize. Throws VectorSaturationError listing every
/// saturated coordinate.
std::vector<int> quantize_vector(const QuantizerSpec& spec,
                                 std::span<const Interval> ranges,
                                 std::span<const double> v);

}  // namespace qdpd

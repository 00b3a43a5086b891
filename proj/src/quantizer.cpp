#include "qdpd/quantizer.hpp"

#include <cmath>
#include <string>

#include "qdpd/errors.hpp"

namespace qdpd {

QuantizerSpec::QuantizerSpec(int levels_minus_one) : L(levels_minus_one) {
  if (L < 1) throw DomainError("quantizer needs L >= 1, got " + std::to_string(L));
}

Interval::Interval(double l, double u) : lower(l), upper(u) {
  if (!std::isfinite(l) || !std::isfinite(u) || l > u) {
    throw DomainError("interval bounds must be finite with lower <= upper");
  }
}

namespace {

inline double grid_value(const QuantizerSpec& spec, const Interval& r, int i) {
  return r.lower + i * (r.width() / spec.L);
}

}  // namespace

QuantizeOutcome try_quantize(const QuantizerSpec& spec, const Interval& range,
                             double s) noexcept {
  const double width = range.width();
  if (width == 0.0) return {0, false};

  const double cell = width / spec.L;
  const double slack = 0.5 * cell;
  if (!(s >= range.lower - slack)) return {0, true};  // also catches NaN
  if (!(s <= range.upper + slack)) return {spec.L, true};

  // Candidate from the continuous position, then settle against the exact
  // grid values so the result is the true argmin with ties to the smaller
  // index.
  const double t = (s - range.lower) / cell;
  int i = static_cast<int>(std::ceil(t - 0.5));
  if (i < 0) i = 0;
  if (i > spec.L) i = spec.L;
  auto dist = [&](int j) { return std::abs(grid_value(spec, range, j) - s); };
  while (i > 0 && dist(i - 1) <= dist(i)) --i;
  while (i < spec.L && dist(i + 1) < dist(i)) ++i;
  return {i, false};
}

int quantize(const QuantizerSpec& spec, const Interval& range, double s) {
  const QuantizeOutcome q = try_quantize(spec, range, s);
  if (q.saturated) {
    throw SaturationError("quantizer saturated: " + std::to_string(s) +
                              " outside [" + std::to_string(range.lower) +
                              ", " + std::to_string(range.upper) + "]",
                          q.index, s);
  }
  return q.index;
}

double dequantize(const QuantizerSpec& spec, const Interval& range, int index) {
  if (index < 0 || index > spec.L) {
    throw CodecError("grid index " + std::to_string(index) + " outside [0, " +
                     std::to_string(spec.L) + "]");
  }
  return grid_value(spec, range, index);
}

std::vector<int> quantize_vector(const QuantizerSpec& spec,
                                 std::span<const Interval> ranges,
                                 std::span<const double> v) {
  if (ranges.size() != v.size()) {
    throw ShapeError("quantize_vector: " + std::to_string(v.size()) +
                     " values for " + std::to_string(ranges.size()) + " ranges");
  }
  std::vector<int> out(v.size());
  std::vector<int> saturated;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const QuantizeOutcome q = try_quantize(spec, ranges[k], v[k]);
    out[k] = q.index;
    if (q.saturated) saturated.push_back(static_cast<int>(k));
  }
  if (!saturated.empty()) {
    std::string list;
    for (int c : saturated) list += (list.empty() ? "" : ",") + std::to_string(c);
    throw VectorSaturationError("quantizer saturated at coordinates " + list,
                                std::move(saturated), std::move(out));
  }
  return out;
}

}  // namespace qdpd

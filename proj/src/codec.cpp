#include "qdpd/codec.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "qdpd/errors.hpp"

namespace qdpd {

LengthSchedule::LengthSchedule(double l0, double decay_per_step, double period)
    : l0_(l0), decay_per_step_(decay_per_step), period_(period) {
  if (!(l0 > 0) || !std::isfinite(l0)) throw DomainError("l(0) must be positive");
  if (!(decay_per_step > 0) || !std::isfinite(decay_per_step)) {
    throw DomainError("range decay must be positive");
  }
  if (!(period > 0) || !std::isfinite(period)) {
    throw DomainError("sampling period must be positive");
  }
}

LengthSchedule LengthSchedule::from_rate(double l0, double decay_rate,
                                         double period) {
  return LengthSchedule(l0, decay_rate * period, period);
}

double LengthSchedule::length(std::int64_t k) const {
  return l0_ * std::exp(-decay_per_step_ * static_cast<double>(k));
}

RangeState initial_range(int coordinates, const LengthSchedule& schedule,
                         const QuantizerSpec& spec) {
  return {Eigen::VectorXd::Zero(coordinates), spec.L * schedule.l0() / 2.0, 0};
}

int bits_per_index(const QuantizerSpec& spec) {
  return std::bit_width(static_cast<unsigned>(spec.L));
}

int bandwidth_per_step(const QuantizerSpec& spec, int n, BitMode mode) {
  if (n < 1) throw DomainError("dimension must be positive");
  const int width = mode == BitMode::Full
                        ? bits_per_index(spec)
                        : std::bit_width(static_cast<unsigned>(spec.L - 1));
  return 2 * n * width;
}

namespace {

RangeState advance(const QuantizerSpec& spec, const LengthSchedule& schedule,
                   Eigen::VectorXd q, std::int64_t k) {
  const double half_width = spec.L * schedule.length(k + 1) / 2.0;
  if (!(half_width > 0)) {
    throw DomainError("quantization range length underflowed at step " +
                      std::to_string(k + 1));
  }
  return {std::move(q), half_width, k + 1};
}

void check_schedule(const RangeState& range, const LengthSchedule& schedule,
                    const QuantizerSpec& spec) {
  const double expected = spec.L * schedule.length(range.step) / 2.0;
  if (std::abs(range.half_width - expected) > 1e-12 * expected) {
    throw CodecError("range half-width disagrees with the length schedule at step " +
                     std::to_string(range.step));
  }
}

Eigen::VectorXd dequantize_payload(const RangeState& range,
                                   const QuantizerSpec& spec,
                                   const std::vector<int>& payload) {
  Eigen::VectorXd q(range.center.size());
  for (Eigen::Index c = 0; c < q.size(); ++c) {
    q[c] = dequantize(spec, range.coordinate_range(c), payload[c]);
  }
  return q;
}

}  // namespace

EncodeResult encode(const RangeState& range, const LengthSchedule& schedule,
                    const QuantizerSpec& spec,
                    const Eigen::Ref<const Eigen::VectorXd>& z, std::int64_t k,
                    int agent_id) {
  if (range.step != k) {
    throw DesyncError("encoder range is at step " + std::to_string(range.step) +
                          ", asked to encode step " + std::to_string(k),
                      agent_id, range.step, k);
  }
  if (z.size() != range.center.size()) {
    throw ShapeError("encode: state has " + std::to_string(z.size()) +
                     " coordinates, range tracks " +
                     std::to_string(range.center.size()));
  }
  check_schedule(range, schedule, spec);

  Frame frame;
  frame.agent_id = agent_id;
  frame.step = k;
  frame.payload.resize(z.size());
  for (Eigen::Index c = 0; c < z.size(); ++c) {
    const QuantizeOutcome out = try_quantize(spec, range.coordinate_range(c), z[c]);
    if (out.saturated) {
      const Interval r = range.coordinate_range(c);
      throw EncoderSaturationError(
          "encoder saturated: agent " + std::to_string(agent_id) + ", step " +
              std::to_string(k) + ", coordinate " + std::to_string(c) +
              " value " + std::to_string(z[c]) + " outside [" +
              std::to_string(r.lower) + ", " + std::to_string(r.upper) + "]",
          agent_id, k, static_cast<int>(c));
    }
    frame.payload[c] = out.index;
  }
  frame.bit_length = static_cast<int>(z.size()) * bits_per_index(spec);

  Eigen::VectorXd q = dequantize_payload(range, spec, frame.payload);
  RangeState next = advance(spec, schedule, q, k);
  return {std::move(frame), std::move(next), std::move(q)};
}

DecodeResult decode(const RangeState& range, const LengthSchedule& schedule,
                    const QuantizerSpec& spec, const Frame& frame) {
  if (frame.step != range.step) {
    throw DesyncError("decoder for agent " + std::to_string(frame.agent_id) +
                          " expects step " + std::to_string(range.step) +
                          ", frame carries step " + std::to_string(frame.step),
                      frame.agent_id, range.step, frame.step);
  }
  if (frame.payload.size() != static_cast<std::size_t>(range.center.size())) {
    throw CodecError("frame payload length does not match the tracked range");
  }
  check_schedule(range, schedule, spec);
  Eigen::VectorXd q = dequantize_payload(range, spec, frame.payload);
  RangeState next = advance(spec, schedule, q, range.step);
  return {std::move(q), std::move(next)};
}

namespace {

constexpr std::size_t kHeaderBytes = 6;

class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}
  void put(std::uint32_t value, int width) {
    for (int b = width - 1; b >= 0; --b) {
      if (used_ == 0) out_.push_back(0);
      if ((value >> b) & 1u) out_.back() |= static_cast<std::uint8_t>(0x80u >> used_);
      used_ = (used_ + 1) % 8;
    }
  }

 private:
  std::vector<std::uint8_t>& out_;
  int used_ = 0;
};

}  // namespace

std::vector<std::uint8_t> pack_bits(const Frame& frame) {
  if (frame.agent_id < 0 || frame.agent_id > 0xFFFF) {
    throw FramingError("agent id does not fit in 16 bits");
  }
  if (frame.step < 0 || frame.step > std::numeric_limits<std::uint32_t>::max()) {
    throw FramingError("step does not fit in 32 bits");
  }
  if (frame.payload.empty() || frame.bit_length % frame.payload.size() != 0) {
    throw FramingError("bit length is not a whole number of codes");
  }
  const int width = frame.bit_length / static_cast<int>(frame.payload.size());

  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + (frame.bit_length + 7) / 8);
  const auto id = static_cast<std::uint16_t>(frame.agent_id);
  const auto step = static_cast<std::uint32_t>(frame.step);
  out.push_back(static_cast<std::uint8_t>(id >> 8));
  out.push_back(static_cast<std::uint8_t>(id));
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(step >> shift));
  }
  BitWriter writer(out);
  for (int index : frame.payload) {
    if (index < 0 || (width < 32 && static_cast<std::uint32_t>(index) >> width)) {
      throw CodecError("index " + std::to_string(index) + " does not fit in " +
                       std::to_string(width) + " bits");
    }
    writer.put(static_cast<std::uint32_t>(index), width);
  }
  return out;
}

Frame unpack_bits(std::span<const std::uint8_t> bytes, int n,
                  const QuantizerSpec& spec) {
  if (n < 1) throw DomainError("dimension must be positive");
  const int width = bits_per_index(spec);
  const int codes = 2 * n;
  const std::size_t payload_bytes = (static_cast<std::size_t>(codes) * width + 7) / 8;
  const std::size_t expected = kHeaderBytes + payload_bytes;
  if (bytes.size() < expected) {
    throw FramingError("truncated frame: " + std::to_string(bytes.size()) +
                       " bytes, need " + std::to_string(expected));
  }
  if (bytes.size() > expected) {
    throw FramingError("oversized frame: " + std::to_string(bytes.size()) +
                       " bytes, expected " + std::to_string(expected));
  }

  Frame frame;
  frame.agent_id = (bytes[0] << 8) | bytes[1];
  std::uint32_t step = 0;
  for (int b = 2; b < 6; ++b) step = (step << 8) | bytes[b];
  frame.step = step;
  frame.bit_length = codes * width;
  frame.payload.resize(codes);

  std::size_t bit = kHeaderBytes * 8;
  auto read_bit = [&]() {
    const int v = (bytes[bit / 8] >> (7 - bit % 8)) & 1;
    ++bit;
    return v;
  };
  for (int c = 0; c < codes; ++c) {
    int v = 0;
    for (int b = 0; b < width; ++b) v = (v << 1) | read_bit();
    if (v > spec.L) {
      throw CodecError("decoded index " + std::to_string(v) + " exceeds L = " +
                       std::to_string(spec.L));
    }
    frame.payload[c] = v;
  }
  while (bit < bytes.size() * 8) {
    if (read_bit()) throw FramingError("nonzero padding bits");
  }
  return frame;
}

Encoder::Encoder(int agent_id, int n, QuantizerSpec spec, LengthSchedule schedule)
    : agent_id_(agent_id),
      spec_(spec),
      schedule_(schedule),
      range_(initial_range(2 * n, schedule, spec)),
      q_(Eigen::VectorXd::Zero(2 * n)) {}

const Frame& Encoder::encode(const Eigen::Ref<const Eigen::VectorXd>& z) {
  EncodeResult r = qdpd::encode(range_, schedule_, spec_, z, range_.step, agent_id_);
  frame_ = std::move(r.frame);
  range_ = std::move(r.next);
  q_ = std::move(r.q);
  return frame_;
}

Decoder::Decoder(int source_agent, int n, QuantizerSpec spec, LengthSchedule schedule)
    : source_(source_agent),
      spec_(spec),
      schedule_(schedule),
      range_(initial_range(2 * n, schedule, spec)),
      q_(Eigen::VectorXd::Zero(2 * n)) {}

const Eigen::VectorXd& Decoder::decode(const Frame& frame) {
  if (frame.agent_id != source_) {
    throw DesyncError("decoder for agent " + std::to_string(source_) +
                          " received a frame from agent " +
                          std::to_string(frame.agent_id),
                      source_, range_.step, frame.step);
  }
  DecodeResult r = qdpd::decode(range_, schedule_, spec_, frame);
  range_ = std::move(r.next);
  q_ = std::move(r.q);
  return q_;
}

}  // namespace qdpd

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qdpd/quantizer.hpp"

namespace qdpd {

/// Geometric range-length schedule l(k) = l0 exp(-decay_per_step k), where
/// decay_per_step = (eta/2) T.
class LengthSchedule {
 public:
  LengthSchedule(double l0, double decay_per_step, double period);
  /// Build from a continuous-time decay rate (eta/2 per second).
  static LengthSchedule from_rate(double l0, double decay_rate, double period);

  double l0() const noexcept { return l0_; }
  double decay_per_step() const noexcept { return decay_per_step_; }
  double decay_rate() const noexcept { return decay_per_step_ / period_; }
  double period() const noexcept { return period_; }
  double length(std::int64_t k) const;

 private:
  double l0_;
  double decay_per_step_;
  double period_;
};

/// Tracked quantization range of one agent's 2n-vector: every coordinate uses
/// [center_k - half_width, center_k + half_width].
struct RangeState {
  Eigen::VectorXd center;
  double half_width = 0.0;
  std::int64_t step = 0;

  Interval coordinate_range(Eigen::Index k) const {
    return {center[k] - half_width, center[k] + half_width};
  }
  friend bool operator==(const RangeState& a, const RangeState& b) {
    return a.step == b.step && a.half_width == b.half_width &&
           a.center.size() == b.center.size() && a.center == b.center;
  }
};

/// Range at k = 0: centered at the origin with half-width L l(0) / 2.
RangeState initial_range(int coordinates, const LengthSchedule& schedule,
                         const QuantizerSpec& spec);

struct Frame {
  int agent_id = 0;
  std::int64_t step = 0;
  std::vector<int> payload;  ///< grid indices in [0, L]
  int bit_length = 0;        ///< payload bits on the wire (full-width codes)
};

enum class BitMode { Full, ZeroSuppressed };

/// ceil(log2(L+1)): width of one fixed-length index code.
int bits_per_index(const QuantizerSpec& spec);
/// Bits one agent sends per sampling instant for an n-dimensional problem:
/// 2n ceil(log2(L+1)) (Full) or 2n ceil(log2 L) (ZeroSuppressed, which does
/// not count the all-zero code).
int bandwidth_per_step(const QuantizerSpec& spec, int n, BitMode mode);

struct EncodeResult {
  Frame frame;
  RangeState next;
  Eigen::VectorXd q;  ///< dequantized value, identical to what decoders see
};

/// Quantize z inside the range for step k, emit the frame, and advance the
/// range to step k+1 centered at the new q with half-width L l(k+1) / 2.
/// Throws EncoderSaturationError naming agent, step and coordinate.
EncodeResult encode(const RangeState& range, const LengthSchedule& schedule,
                    const QuantizerSpec& spec,
                    const Eigen::Ref<const Eigen::VectorXd>& z, std::int64_t k,
                    int agent_id = 0);

struct DecodeResult {
  Eigen::VectorXd q;
  RangeState next;
};

/// Mirror of encode on the receiving side. Throws DesyncError when the frame
/// step does not match the tracked range.
DecodeResult decode(const RangeState& range, const LengthSchedule& schedule,
                    const QuantizerSpec& spec, const Frame& frame);

/// Wire layout: [agent_id: u16 BE][step: u32 BE][payload, MSB-first,
/// zero-padded to a byte boundary].
std::vector<std::uint8_t> pack_bits(const Frame& frame);
/// Inverse of pack_bits for a 2n-index payload. Throws FramingError on
/// truncated/oversized input or nonzero padding, CodecError on an index > L.
Frame unpack_bits(std::span<const std::uint8_t> bytes, int n,
                  const QuantizerSpec& spec);

// Stateful wrappers used by the simulator: one encoder per agent, one decoder
// per (receiver, sender) link.
class Encoder {
 public:
  Encoder(int agent_id, int n, QuantizerSpec spec, LengthSchedule schedule);

  /// Encode z at the encoder's current step and advance.
  const Frame& encode(const Eigen::Ref<const Eigen::VectorXd>& z);
  const Eigen::VectorXd& last_q() const noexcept { return q_; }
  const RangeState& range() const noexcept { return range_; }
  const Frame& last_frame() const noexcept { return frame_; }

 private:
  int agent_id_;
  QuantizerSpec spec_;
  LengthSchedule schedule_;
  RangeState range_;
  Frame frame_;
  Eigen::VectorXd q_;
};

class Decoder {
 public:
  Decoder(int source_agent, int n, QuantizerSpec spec, LengthSchedule schedule);

  const Eigen::VectorXd& decode(const Frame& frame);
  const Eigen::VectorXd& last_q() const noexcept { return q_; }
  const RangeState& range() const noexcept { return range_; }
  int source() const noexcept { return source_; }

 private:
  int source_;
  QuantizerSpec spec_;
  LengthSchedule schedule_;
  RangeState range_;
  Eigen::VectorXd q_;
};

}  // namespace qdpd

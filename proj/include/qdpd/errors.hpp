#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qdpd {

// Every failure raised by the library derives from Error so callers can catch
// the whole family at one site (the CLI maps these onto exit codes).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TopologyError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  NumericError(const std::string& what, int agent)
      : Error(what), agent_(agent) {}
  int agent() const noexcept { return agent_; }

 private:
  int agent_;
};

/// Scalar input fell outside the quantization range plus its half-cell slack.
class SaturationError : public Error {
 public:
  SaturationError(const std::string& what, int clamped_index, double value)
      : Error(what), clamped_index_(clamped_index), value_(value) {}
  int clamped_index() const noexcept { return clamped_index_; }
  double value() const noexcept { return value_; }

 private:
  int clamped_index_;
  double value_;
};

class VectorSaturationError : public Error {
 public:
  VectorSaturationError(const std::string& what, std::vector<int> coordinates,
                        std::vector<int> clamped_indices)
      : Error(what),
        coordinates_(std::move(coordinates)),
        clamped_indices_(std::move(clamped_indices)) {}
  const std::vector<int>& coordinates() const noexcept { return coordinates_; }
  /// Full index vector with saturated coordinates clamped onto the grid.
  const std::vector<int>& clamped_indices() const noexcept {
    return clamped_indices_;
  }

 private:
  std::vector<int> coordinates_;
  std::vector<int> clamped_indices_;
};

class CodecError : public Error {
 public:
  using Error::Error;
};

class FramingError : public CodecError {
 public:
  using CodecError::CodecError;
};

class EncoderSaturationError : public Error {
 public:
  EncoderSaturationError(const std::string& what, int agent, std::int64_t step,
                         int coordinate)
      : Error(what), agent_(agent), step_(step), coordinate_(coordinate) {}
  int agent() const noexcept { return agent_; }
  std::int64_t step() const noexcept { return step_; }
  int coordinate() const noexcept { return coordinate_; }

 private:
  int agent_;
  std::int64_t step_;
  int coordinate_;
};

class DesyncError : public Error {
 public:
  DesyncError(const std::string& what, int agent, std::int64_t expected_step,
              std::int64_t frame_step)
      : Error(what),
        agent_(agent),
        expected_step_(expected_step),
        frame_step_(frame_step) {}
  int agent() const noexcept { return agent_; }
  std::int64_t expected_step() const noexcept { return expected_step_; }
  std::int64_t frame_step() const noexcept { return frame_step_; }

 private:
  int agent_;
  std::int64_t expected_step_;
  std::int64_t frame_step_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::int64_t step, int agent)
      : Error(what), step_(step), agent_(agent) {}
  std::int64_t step() const noexcept { return step_; }
  int agent() const noexcept { return agent_; }

 private:
  std::int64_t step_;
  int agent_;
};

/// A feasibility inequality of the parameter formulas is violated.
class InfeasibleParameters : public Error {
 public:
  InfeasibleParameters(const std::string& inequality, double margin)
      : Error("infeasible parameters: " + inequality +
              " (margin " + std::to_string(margin) + ")"),
        inequality_(inequality),
        margin_(margin) {}
  const std::string& inequality() const noexcept { return inequality_; }
  double margin() const noexcept { return margin_; }

 private:
  std::string inequality_;
  double margin_;
};

/// The first KKT block admits no dual solution at the supplied primal point.
class KktError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path)
      : Error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace qdpd

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lipfree {

enum class ErrorCode {
  // metric validation
  MalformedInput,
  AsymmetricDistance,
  NegativeDistance,
  ZeroDistanceDistinctPoints,
  TriangleViolation,
  BadBaseIndex,
  DisconnectedGraph,
  InvalidArgument,
  // functions and measures
  NonFiniteValue,
  FloorNormTooLarge,
  FloorExceedsFunction,
  NotAnIntervalNet,
  AnchorNotOnNet,
  NotZeroSum,
  SpaceMismatch,
  // maps and certification
  MapNormExceedsOne,
  NotNorming,
  MethodDisagreement,
  PrimalDualDisagreement,
  // geodesic experiments
  CodomainNotInterval,
  NoStoredPath,
  NotStraightPath,
  RangeNotDense,
  // internal
  InvariantFailure,
  SolverFailure,
  UnknownCommand,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::AsymmetricDistance: return "AsymmetricDistance";
    case ErrorCode::NegativeDistance: return "NegativeDistance";
    case ErrorCode::ZeroDistanceDistinctPoints: return "ZeroDistanceDistinctPoints";
    case ErrorCode::TriangleViolation: return "TriangleViolation";
    case ErrorCode::BadBaseIndex: return "BadBaseIndex";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::FloorNormTooLarge: return "FloorNormTooLarge";
    case ErrorCode::FloorExceedsFunction: return "FloorExceedsFunction";
    case ErrorCode::NotAnIntervalNet: return "NotAnIntervalNet";
    case ErrorCode::AnchorNotOnNet: return "AnchorNotOnNet";
    case ErrorCode::NotZeroSum: return "NotZeroSum";
    case ErrorCode::SpaceMismatch: return "SpaceMismatch";
    case ErrorCode::MapNormExceedsOne: return "MapNormExceedsOne";
    case ErrorCode::NotNorming: return "NotNorming";
    case ErrorCode::MethodDisagreement: return "MethodDisagreement";
    case ErrorCode::PrimalDualDisagreement: return "PrimalDualDisagreement";
    case ErrorCode::CodomainNotInterval: return "CodomainNotInterval";
    case ErrorCode::NoStoredPath: return "NoStoredPath";
    case ErrorCode::NotStraightPath: return "NotStraightPath";
    case ErrorCode::RangeNotDense: return "RangeNotDense";
    case ErrorCode::InvariantFailure: return "InvariantFailure";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::UnknownCommand: return "UnknownCommand";
  }
  return "Unknown";
}

/// True for codes that indicate a bug in this library rather than bad input.
constexpr bool is_internal(ErrorCode code) {
  return code == ErrorCode::MethodDisagreement || code == ErrorCode::PrimalDualDisagreement ||
         code == ErrorCode::InvariantFailure || code == ErrorCode::SolverFailure;
}

/// Exception carrying a machine-readable code and the point indices that
/// witness the failure (e.g. the offending triple for a triangle violation).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<std::size_t> witness = {},
        std::string json_path = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + message +
                           (json_path.empty() ? std::string() : " at " + json_path)),
        code_(code),
        witness_(std::move(witness)),
        json_path_(std::move(json_path)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::size_t>& witness() const noexcept { return witness_; }
  /// JSON pointer of the offending input field, when the error came from a file.
  const std::string& json_path() const noexcept { return json_path_; }

 private:
  ErrorCode code_;
  std::vector<std::size_t> witness_;
  std::string json_path_;
};

}  // namespace lipfree

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gwb {

/// Error codes surfaced by the library. The CLI reports them verbatim.
enum class ErrorCode {
  InvalidMeasure,
  InvalidGrid,
  NonMonotone,
  PartitionMismatch,
  WeightSumInvalid,
  StdOrder,
  CollisionBeforeS,
  DimensionMismatch,
  TooLarge,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidMeasure: return "InvalidMeasure";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::NonMonotone: return "NonMonotone";
    case ErrorCode::PartitionMismatch: return "PartitionMismatch";
    case ErrorCode::WeightSumInvalid: return "WeightSumInvalid";
    case ErrorCode::StdOrder: return "StdOrder";
    case ErrorCode::CollisionBeforeS: return "CollisionBeforeS";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooLarge: return "TooLarge";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gwb

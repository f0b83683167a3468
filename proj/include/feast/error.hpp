#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace feast {

enum class ErrorCode {
  InvalidArgument,
  Io,
  // taxonomy
  MalformedRecord,
  CycleDetected,
  DanglingParent,
  DanglingImplicitFacet,
  DifferentHierarchies,
  UnknownCode,
  // codec
  EmptyInput,
  BadBaseCode,
  BadGroupSyntax,
  UnknownSeparator,
  DuplicateGroup,
  // mining
  SameNode,
  EmptyPool,
  // embedding / remote
  RemoteUnavailable,
  DimensionMismatch,
  ZeroVector,
  NonFiniteLoss,
  // retrieval
  EmptyHierarchy,
  EmptyIndex,
  // metrics
  EmptyRanking,
  EmptyRelevantSet,
  LengthMismatch,
  UnknownLabel,
  // dataset
  TargetTooLarge,
  // pipeline
  MissingCategoryIndex,
  MissingPlaceholder,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::DanglingParent: return "DanglingParent";
    case ErrorCode::DanglingImplicitFacet: return "DanglingImplicitFacet";
    case ErrorCode::DifferentHierarchies: return "DifferentHierarchies";
    case ErrorCode::UnknownCode: return "UnknownCode";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::BadBaseCode: return "BadBaseCode";
    case ErrorCode::BadGroupSyntax: return "BadGroupSyntax";
    case ErrorCode::UnknownSeparator: return "UnknownSeparator";
    case ErrorCode::DuplicateGroup: return "DuplicateGroup";
    case ErrorCode::SameNode: return "SameNode";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::RemoteUnavailable: return "RemoteUnavailable";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::EmptyHierarchy: return "EmptyHierarchy";
    case ErrorCode::EmptyIndex: return "EmptyIndex";
    case ErrorCode::EmptyRanking: return "EmptyRanking";
    case ErrorCode::EmptyRelevantSet: return "EmptyRelevantSet";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::TargetTooLarge: return "TargetTooLarge";
    case ErrorCode::MissingCategoryIndex: return "MissingCategoryIndex";
    case ErrorCode::MissingPlaceholder: return "MissingPlaceholder";
  }
  return "Unknown";
}

// Every failure in the library is reported through this type. `offset` is set
// by the code parser (byte position), `step` by the trainers.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> offset = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        message_(message),
        offset_(offset) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }
  std::optional<std::size_t> offset() const noexcept { return offset_; }

 private:
  ErrorCode code_;
  std::string message_;
  std::optional<std::size_t> offset_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message,
                              std::optional<std::size_t> offset = std::nullopt) {
  throw Error(code, message, offset);
}

}  // namespace feast

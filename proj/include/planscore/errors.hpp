#pragma once

#include <stdexcept>
#include <string>

namespace planscore {

enum class ErrorCode {
  DuplicatePlaceholder,
  DanglingReference,
  CycleDetected,
  UnboundPlaceholder,
  SpanOutOfBounds,
  GraphTooLarge,
  EmptyGoldPlan,
  GroupTooSmall,
  NotApplicable,
  DuplicateId,
  MalformedInput,
  UnresolvedGold,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::DuplicatePlaceholder: return "duplicate-placeholder";
    case ErrorCode::DanglingReference: return "dangling-reference";
    case ErrorCode::CycleDetected: return "cycle-detected";
    case ErrorCode::UnboundPlaceholder: return "unbound-placeholder";
    case ErrorCode::SpanOutOfBounds: return "span-out-of-bounds";
    case ErrorCode::GraphTooLarge: return "graph-too-large";
    case ErrorCode::EmptyGoldPlan: return "empty-gold-plan";
    case ErrorCode::GroupTooSmall: return "group-too-small";
    case ErrorCode::NotApplicable: return "not-applicable";
    case ErrorCode::DuplicateId: return "duplicate-id";
    case ErrorCode::MalformedInput: return "malformed-input";
    case ErrorCode::UnresolvedGold: return "unresolved-gold";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace planscore

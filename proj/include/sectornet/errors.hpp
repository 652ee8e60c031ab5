#pragma once

#include <stdexcept>
#include <string>

namespace sectornet {

enum class ErrorCode {
  Precondition,
  AxisOnEdge,
  SearchSpaceTooLarge,
  SectorizationMismatch,
  UnknownLink,
  InvalidBipartition,
  ZeroFlow,
  NoEdges,
  MalformedCsv,
  MalformedInput,
  InvariantViolation,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Precondition: return "Precondition";
    case ErrorCode::AxisOnEdge: return "AxisOnEdge";
    case ErrorCode::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorCode::SectorizationMismatch: return "SectorizationMismatch";
    case ErrorCode::UnknownLink: return "UnknownLink";
    case ErrorCode::InvalidBipartition: return "InvalidBipartition";
    case ErrorCode::ZeroFlow: return "ZeroFlow";
    case ErrorCode::NoEdges: return "NoEdges";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace sectornet

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace geosacs {

enum class ErrorCode {
  MalformedRow,
  DegenerateQuaternion,
  TooShort,
  EmptyInput,
  DegenerateCurve,
  NonOrthonormalFrame,
  EndOfCanal,
  OutOfRange,
  MalformedCanal,
  MalformedConfig,
  BindFailure,
  MalformedFrame,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::DegenerateQuaternion: return "DegenerateQuaternion";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateCurve: return "DegenerateCurve";
    case ErrorCode::NonOrthonormalFrame: return "NonOrthonormalFrame";
    case ErrorCode::EndOfCanal: return "EndOfCanal";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::MalformedCanal: return "MalformedCanal";
    case ErrorCode::MalformedConfig: return "MalformedConfig";
    case ErrorCode::BindFailure: return "BindFailure";
    case ErrorCode::MalformedFrame: return "MalformedFrame";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Library error. what() reads "<ErrorName>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace geosacs

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cursive {

enum class ErrorCode {
  UnreadableFile,
  UnsupportedFormat,
  EmptyImage,
  NoForeground,
  DegenerateContour,
  AmbiguousPenWidth,
  PathOutsideInk,
  UnknownLetter,
  NoJoin,
  BandTooShort,
  BandCountMismatch,
  NonSeparatingCut,
  MismatchedLandmarkCount,
  DegenerateShape,
  NoShapes,
  MissingInputPoint,
  SpecInvalid,
  InvalidArgument,
};

constexpr std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnreadableFile: return "UnreadableFile";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::EmptyImage: return "EmptyImage";
    case ErrorCode::NoForeground: return "NoForeground";
    case ErrorCode::DegenerateContour: return "DegenerateContour";
    case ErrorCode::AmbiguousPenWidth: return "AmbiguousPenWidth";
    case ErrorCode::PathOutsideInk: return "PathOutsideInk";
    case ErrorCode::UnknownLetter: return "UnknownLetter";
    case ErrorCode::NoJoin: return "NoJoin";
    case ErrorCode::BandTooShort: return "BandTooShort";
    case ErrorCode::BandCountMismatch: return "BandCountMismatch";
    case ErrorCode::NonSeparatingCut: return "NonSeparatingCut";
    case ErrorCode::MismatchedLandmarkCount: return "MismatchedLandmarkCount";
    case ErrorCode::DegenerateShape: return "DegenerateShape";
    case ErrorCode::NoShapes: return "NoShapes";
    case ErrorCode::MissingInputPoint: return "MissingInputPoint";
    case ErrorCode::SpecInvalid: return "SpecInvalid";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every library failure carries one of the named codes above; the CLI
/// prints the name on stderr.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Joint index the error occurred at, -1 when not joint-specific.
  int joint() const noexcept { return joint_; }
  Error with_joint(int joint) const {
    Error e(code_, std::string(what()).substr(error_name(code_).size() + 2) +
                       " (joint " + std::to_string(joint) + ")");
    e.joint_ = joint;
    return e;
  }

 private:
  ErrorCode code_;
  int joint_ = -1;
};

}  // namespace cursive

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eshelby {

enum class ErrorCode {
  PoissonSingular,
  PoissonOutOfRange,
  ContrastSingular,
  DegenerateStrain,
  ModulusOutOfRange,
  DegenerateAxes,
  InvalidGeometry,
  SingularSystem,
  FootprintOverflow,
  WindowOverlapsMask,
  WindowOutOfBounds,
  MaskTooSmall,
  NoPlateau,
  ZeroTruthSum,
  EmptyLog,
  ReadingOutOfRange,
  HeaderMismatch,
  MalformedGrid,
  MissingMask,
  InvalidConfig,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library-wide exception. Every failure carries a machine-readable code so
/// callers (the CLI in particular) can map it to diagnostics.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace eshelby

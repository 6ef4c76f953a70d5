#include "eshelby/error.hpp"

namespace eshelby {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::PoissonSingular: return "PoissonSingular";
    case ErrorCode::PoissonOutOfRange: return "PoissonOutOfRange";
    case ErrorCode::ContrastSingular: return "ContrastSingular";
    case ErrorCode::DegenerateStrain: return "DegenerateStrain";
    case ErrorCode::ModulusOutOfRange: return "ModulusOutOfRange";
    case ErrorCode::DegenerateAxes: return "DegenerateAxes";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::FootprintOverflow: return "FootprintOverflow";
    case ErrorCode::WindowOverlapsMask: return "WindowOverlapsMask";
    case ErrorCode::WindowOutOfBounds: return "WindowOutOfBounds";
    case ErrorCode::MaskTooSmall: return "MaskTooSmall";
    case ErrorCode::NoPlateau: return "NoPlateau";
    case ErrorCode::ZeroTruthSum: return "ZeroTruthSum";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::ReadingOutOfRange: return "ReadingOutOfRange";
    case ErrorCode::HeaderMismatch: return "HeaderMismatch";
    case ErrorCode::MalformedGrid: return "MalformedGrid";
    case ErrorCode::MissingMask: return "MissingMask";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace eshelby

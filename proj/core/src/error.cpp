#include "waverec/error.hpp"

namespace waverec {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::MeshTooCoarse: return "MeshTooCoarse";
    case ErrorCode::PointOutsideMesh: return "PointOutsideMesh";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::SolverDiverged: return "SolverDiverged";
    case ErrorCode::UnstableConfig: return "UnstableConfig";
    case ErrorCode::NumericalBlowup: return "NumericalBlowup";
    case ErrorCode::NonpositiveTransform: return "NonpositiveTransform";
    case ErrorCode::StateCorrupt: return "StateCorrupt";
    case ErrorCode::TransformOverflow: return "TransformOverflow";
    case ErrorCode::SingularLumping: return "SingularLumping";
    case ErrorCode::InvalidPhantom: return "InvalidPhantom";
    case ErrorCode::MeshMismatch: return "MeshMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace waverec

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace waverec {

enum class ErrorCode {
  InvalidGeometry,
  MeshTooCoarse,
  PointOutsideMesh,
  DimMismatch,
  SolverDiverged,
  UnstableConfig,
  NumericalBlowup,
  NonpositiveTransform,
  StateCorrupt,
  TransformOverflow,
  SingularLumping,
  InvalidPhantom,
  MeshMismatch,
  InvalidConfig,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. `code()` is stable and machine readable;
/// `what()` carries the human detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class SolverDivergedError : public Error {
 public:
  SolverDivergedError(const std::string& detail, double residual, int iterations)
      : Error(ErrorCode::SolverDiverged, detail), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

class NumericalBlowupError : public Error {
 public:
  NumericalBlowupError(const std::string& detail, long step)
      : Error(ErrorCode::NumericalBlowup, detail), step_(step) {}

  long step() const noexcept { return step_; }

 private:
  long step_;
};

#define WAVEREC_THROW_IF(cond, code, msg)      \
  do {                                         \
    if (cond) throw ::waverec::Error((code), (msg)); \
  } while (0)

}  // namespace waverec

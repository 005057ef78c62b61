#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ccbm {

enum class ErrorCode {
  StarShapeViolation,
  GeometryOverlap,
  DegenerateEdge,
  MeshInversion,
  EmptyPolyline,
  DegenerateTriangle,
  SingularSystem,
  DirichletMismatch,
  MissingGeometry,
  StepCollapse,
  BadRadii,
  BadConfig,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; the code identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::StarShapeViolation: return "StarShapeViolation";
    case ErrorCode::GeometryOverlap: return "GeometryOverlap";
    case ErrorCode::DegenerateEdge: return "DegenerateEdge";
    case ErrorCode::MeshInversion: return "MeshInversion";
    case ErrorCode::EmptyPolyline: return "EmptyPolyline";
    case ErrorCode::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::DirichletMismatch: return "DirichletMismatch";
    case ErrorCode::MissingGeometry: return "MissingGeometry";
    case ErrorCode::StepCollapse: return "StepCollapse";
    case ErrorCode::BadRadii: return "BadRadii";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace ccbm

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace visco {

enum class Errc {
  NotSPD,
  DetOutOfGauge,
  Singular,
  EmptyWindow,
  WindowMismatch,
  CflViolation,
  NonFinite,
  ConstraintViolation,
  InvalidFamily,
  GridMismatch,
  MissingArtifacts,
  ConfigError,
  IoError,
  InvalidArgument,
};

std::string_view to_string(Errc code);

/// Library-wide exception. Every failure mode named in the public contracts
/// is reported through this type with a distinguishing code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::NotSPD: return "NotSPD";
    case Errc::DetOutOfGauge: return "DetOutOfGauge";
    case Errc::Singular: return "Singular";
    case Errc::EmptyWindow: return "EmptyWindow";
    case Errc::WindowMismatch: return "WindowMismatch";
    case Errc::CflViolation: return "CflViolation";
    case Errc::NonFinite: return "NonFinite";
    case Errc::ConstraintViolation: return "ConstraintViolation";
    case Errc::InvalidFamily: return "InvalidFamily";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::MissingArtifacts: return "MissingArtifacts";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace visco

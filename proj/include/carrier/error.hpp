#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace carrier {

enum class ErrorKind {
  EmptyCone,
  DimensionMismatch,
  UnsupportedDimension,
  NotCompactSubcone,
  InvalidArgument,
  TailDivergence,
  Inconclusive,
  QuasianalyticSequence,
  QuadratureUnderflow,
  UnsupportedEta,
  SeparationViolation,
  BoundViolation,
  QuadratureSingularity,
  ConeChainViolation,
  OutsideTube,
  Divergence,
  Saturated,
  CarrierViolation,
  QuadratureDivergence,
  ConfigError,
  ParseError,
};

std::string_view to_string(ErrorKind k) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind k) noexcept {
  switch (k) {
    case ErrorKind::EmptyCone: return "EmptyCone";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorKind::NotCompactSubcone: return "NotCompactSubcone";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::TailDivergence: return "TailDivergence";
    case ErrorKind::Inconclusive: return "Inconclusive";
    case ErrorKind::QuasianalyticSequence: return "QuasianalyticSequence";
    case ErrorKind::QuadratureUnderflow: return "QuadratureUnderflow";
    case ErrorKind::UnsupportedEta: return "UnsupportedEta";
    case ErrorKind::SeparationViolation: return "SeparationViolation";
    case ErrorKind::BoundViolation: return "BoundViolation";
    case ErrorKind::QuadratureSingularity: return "QuadratureSingularity";
    case ErrorKind::ConeChainViolation: return "ConeChainViolation";
    case ErrorKind::OutsideTube: return "OutsideTube";
    case ErrorKind::Divergence: return "Divergence";
    case ErrorKind::Saturated: return "Saturated";
    case ErrorKind::CarrierViolation: return "CarrierViolation";
    case ErrorKind::QuadratureDivergence: return "QuadratureDivergence";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace carrier

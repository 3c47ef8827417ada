#pragma once

#include <stdexcept>
#include <string>

namespace ips {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DivisionByZero : Error { using Error::Error; };
struct NonConvergent : Error { using Error::Error; };
struct InvalidRegime : Error { using Error::Error; };
struct RegimeViolation : Error { using Error::Error; };
struct InfeasibleBoundary : Error { using Error::Error; };
struct NoBijectivisation : Error { using Error::Error; };
struct NonTermination : Error { using Error::Error; };
struct InfeasibleConditioning : Error { using Error::Error; };
struct ChamberViolation : Error { using Error::Error; };
struct StepStartRequired : Error { using Error::Error; };
struct TruncationTooTight : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };

}  // namespace ips

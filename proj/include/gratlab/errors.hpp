#pragma once

#include <stdexcept>
#include <string>

namespace gratlab {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mode / admissibility errors.
struct TruncationTooSmall : Error { using Error::Error; };
struct ResonantMode : Error { using Error::Error; };
struct ModeSetMismatch : Error { using Error::Error; };

// Domain-transform errors.
struct InjectivityViolated : Error { using Error::Error; };
struct ProfileTooSteep : Error { using Error::Error; };

// Solver errors.
struct GridTooCoarse : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };

// Random-surface errors.
struct NonPositiveEigenvalue : Error { using Error::Error; };

// Harness errors.
struct RejectionRateExceeded : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };

// Config errors.
struct ParseError : Error { using Error::Error; };

struct ValidationError : Error {
    ValidationError(const std::string& field, const std::string& constraint)
        : Error("invalid value for '" + field + "': must be " + constraint),
          field(field), constraint(constraint) {}
    std::string field;
    std::string constraint;
};

} // namespace gratlab

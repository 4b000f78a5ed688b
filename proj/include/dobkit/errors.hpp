#pragma once

#include <stdexcept>
#include <string>

namespace dobkit {

// Base for every error the toolkit raises on purpose. Callers that only
// want to distinguish "config problem" from "numerical problem" can catch
// ConfigError / NumericError; everything else is a plain Error.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};
struct NumericError : Error {
    using Error::Error;
};

// --- transfer-function algebra ---
struct PoleHit : NumericError {
    using NumericError::NumericError;
};
struct NoConvergence : NumericError {
    using NumericError::NumericError;
};
struct DivByZeroTF : NumericError {
    using NumericError::NumericError;
};
struct NonConjugate : NumericError {
    using NumericError::NumericError;
};
struct NotRHP : NumericError {
    using NumericError::NumericError;
};

// --- plant / loop assembly ---
struct DeltaOutOfRange : NumericError {
    using NumericError::NumericError;
};
struct MissingApproxNominal : NumericError {
    using NumericError::NumericError;
};
struct UnstableInverse : NumericError {
    using NumericError::NumericError;
};
struct ImproperLoop : NumericError {
    using NumericError::NumericError;
};
struct NoRhpZero : NumericError {
    using NumericError::NumericError;
};
struct NoRhpPole : NumericError {
    using NumericError::NumericError;
};
struct NotStabilized : NumericError {
    using NumericError::NumericError;
};
struct NotMinimumPhase : NumericError {
    using NumericError::NumericError;
};
struct HasDelay : NumericError {
    using NumericError::NumericError;
};

// --- integral analysis ---
struct UnstableLoop : NumericError {
    using NumericError::NumericError;
};
struct DivergentNearZero : NumericError {
    using NumericError::NumericError;
};
struct DeltaTooLarge : NumericError {
    using NumericError::NumericError;
};
struct ZeroDelay : NumericError {
    using NumericError::NumericError;
};
struct UnsupportedOrder : NumericError {
    using NumericError::NumericError;
};

// --- constraint solving ---
struct BadOrdering : NumericError {
    using NumericError::NumericError;
};
struct InfeasibleAngles : NumericError {
    using NumericError::NumericError;
};
struct DomainError : NumericError {
    using NumericError::NumericError;
};
struct DiscriminantNegative : NumericError {
    using NumericError::NumericError;
};
struct GridTooCoarse : NumericError {
    using NumericError::NumericError;
};

// --- simulation ---
struct ImproperTF : NumericError {
    using NumericError::NumericError;
};

// --- config / reporting ---
struct ParseError : ConfigError {
    using ConfigError::ConfigError;
};
struct ValidationError : ConfigError {
    using ConfigError::ConfigError;
};
struct IoError : Error {
    using Error::Error;
};

}  // namespace dobkit

#pragma once

#include <stdexcept>
#include <string>

namespace tabrl {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A model or policy failed construction-time validation.
struct ValidationError : Error {
    using Error::Error;
};

/// A lookup by name failed; the message enumerates the valid names.
struct UnknownNameError : Error {
    using Error::Error;
};

/// A policy and model disagree (missing row for a visited state-action pair).
struct ModelInconsistencyError : Error {
    using Error::Error;
};

/// The Bellman system has no unique solution (improper policy at gamma = 1).
/// The message names the non-terminal states that cannot reach a terminal.
struct SingularSystemError : Error {
    using Error::Error;
};

/// log-gradient requested for an action with probability zero.
struct SingularGradientError : Error {
    using Error::Error;
};

} // namespace tabrl

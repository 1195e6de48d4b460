#pragma once
// Exception types shared across the engine. Budget exhaustion is NOT an
// exception: solvers return best-so-far bounds with a flag instead.

#include <stdexcept>
#include <string>

namespace voiplan {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A model (or model file) violates a structural invariant: non-stochastic
// rows, positive costs, bad discount, inconsistent shapes, ...
struct SpecInvariantViolation : Error {
    using Error::Error;
};

// Bayes update requested for an observation with likelihood below the
// numeric floor; solver code must skip such branches instead.
struct ZeroLikelihoodObservation : Error {
    using Error::Error;
};

// An operation that needs at least one alpha-vector got an empty set.
struct EmptyAlphaSet : Error {
    using Error::Error;
};

// The exhaustive finite-horizon construction would exceed its vector budget.
struct OracleTooLarge : Error {
    using Error::Error;
};

// A gain/metric was requested for settings that do not share their
// maintenance elements (states, dynamics, maintenance rewards, discount).
struct IncompatibleSettings : Error {
    using Error::Error;
};

// make_perm was pointed at the trivial observation action.
struct TrivialActionSelected : Error {
    using Error::Error;
};

// Model/config file could not be parsed; message carries line diagnostics.
struct ParseError : Error {
    using Error::Error;
};

}  // namespace voiplan

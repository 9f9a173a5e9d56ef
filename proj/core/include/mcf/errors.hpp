#pragma once

#include <stdexcept>
#include <string>

namespace mcf {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user input detected before any numerics run (config semantics,
// violated preconditions on public constructors).
struct ValidationError : Error {
    using Error::Error;
};

// Malformed config text; `line` is 1-based.
struct ParseError : Error {
    int line;
    ParseError(int line_, const std::string& what_)
        : Error("line " + std::to_string(line_) + ": " + what_), line(line_) {}
};

// --- spectral ---
struct ImaginaryResidueTooLarge : Error {
    using Error::Error;
};

// --- model ---
struct TriangleViolation : Error {
    using Error::Error;
};
struct InconsistentMobilityPattern : Error {
    using Error::Error;
};
struct NotPositiveSemiDefinite : Error {
    using Error::Error;
};
struct NoWettingEquilibrium : Error {
    using Error::Error;
};

// --- solver ---
struct AllPhasesFrozen : Error {
    using Error::Error;
};
struct SingularConstraintSystem : Error {
    using Error::Error;
};
struct InconsistentTargets : Error {
    using Error::Error;
};
struct TargetUnderflow : Error {
    using Error::Error;
};
struct NonFiniteState : Error {
    using Error::Error;
};

// --- wire theory ---
struct Unrealizable : Error {
    using Error::Error;
};
struct CapSingularity : Error {
    using Error::Error;
};
struct DomainExceeded : Error {
    using Error::Error;
};
struct OutOfRange : Error {
    using Error::Error;
};
struct NonMonotone : Error {
    using Error::Error;
};

// --- scenarios ---
struct BadPartition : Error {
    using Error::Error;
};
struct NoJunction : Error {
    using Error::Error;
};

} // namespace mcf

#pragma once

#include <stdexcept>
#include <string>

namespace tep {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Caller broke a documented precondition (mismatched grids, bad arguments).
class UsageError : public Error {
public:
    using Error::Error;
};

// Config file failed schema validation; lists the offending keys.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Input outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// An iterative solver failed to converge.
class SolverFailure : public Error {
public:
    using Error::Error;
};

// Trajectory entered the sonic band where the steady ODE is singular.
class SonicBreach : public SolverFailure {
public:
    SonicBreach(const std::string& what, double x) : SolverFailure(what), x(x) {}
    double x;
};

// Placing the shock here gives no subsonic continuation up to the outlet.
class InfeasibleShockPosition : public Error {
public:
    InfeasibleShockPosition(const std::string& what, double a) : Error(what), a(a) {}
    double a;
};

// Requested exit density is outside the attainable range [g(a_hi), g(a_lo)].
class NoSolution : public Error {
public:
    NoSolution(const std::string& what, double attainable_lo, double attainable_hi)
        : Error(what), attainable_lo(attainable_lo), attainable_hi(attainable_hi) {}
    double attainable_lo;
    double attainable_hi;
};

// A structural hypothesis of the underlying theory failed (e.g. the
// exit-density map was not monotone because E was not positive at a
// scanned shock position).
class HypothesisViolation : public Error {
public:
    using Error::Error;
};

// Evolution produced a physically invalid state (vacuum, sonic transition).
class StateInvalid : public Error {
public:
    using Error::Error;
};

// The implicit boundary solve of the free-boundary stepper did not converge.
class BoundarySolverError : public SolverFailure {
public:
    using SolverFailure::SolverFailure;
};

// The energy inner product is not positive definite for this base state.
class NormDegenerate : public Error {
public:
    using Error::Error;
};

}  // namespace tep

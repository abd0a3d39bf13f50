#pragma once

#include <stdexcept>
#include <string>

namespace stentsim {

// Every failure raised by the library derives from Error. The C API maps
// each subclass onto one status code (see stentsim.h).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented invariant (design, material, config).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Non-finite or out-of-domain arithmetic inside a pure computation.
class ComputationError : public Error {
public:
    using Error::Error;
};

/// Explicit integration produced a non-finite or exploding state.
class SolverBlowup : public Error {
public:
    SolverBlowup(const std::string& what, double time, int worst_node)
        : Error(what), time_(time), worst_node_(worst_node) {}
    double time() const noexcept { return time_; }
    int worst_node() const noexcept { return worst_node_; }

private:
    double time_;
    int worst_node_;
};

/// Dynamic relaxation did not settle within the step budget.
class ConvergenceTimeout : public Error {
public:
    using Error::Error;
};

class InfeasibleCrimp : public Error {
public:
    using Error::Error;
};

class DeploymentFailure : public Error {
public:
    using Error::Error;
};

/// Stent lost its anchorage during cyclic loading and drifted away.
class DriftError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace stentsim

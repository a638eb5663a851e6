#pragma once

#include <stdexcept>
#include <string>

namespace stark {

// Raised when an ODE solve cannot continue; carries the last accepted state.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double x, double y0, double y1)
        : std::runtime_error(what), last_x(x), last_y0(y0), last_y1(y1) {}
    double last_x;
    double last_y0;
    double last_y1;
};

// Step size fell below the representable floor (stiffness / blow-up).
class StiffnessError : public IntegrationError {
public:
    using IntegrationError::IntegrationError;
};

// The modified phase frame requires 1 - H_alpha > 0 on the whole range.
class FrameError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Sign-switch bracketing failed during a coupled solve.
class EventError : public IntegrationError {
public:
    using IntegrationError::IntegrationError;
};

// A block schedule cannot be realized with the requested parameters.
class ScheduleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad CLI usage / configuration, reported before any computation.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace stark

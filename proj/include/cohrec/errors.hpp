#pragma once

#include <stdexcept>
#include <string>

namespace cohrec {

/// Base class for everything thrown by this library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller passed a value outside the documented domain (bad user input).
class domain_error : public error {
public:
    using error::error;
};

/// An internal invariant failed (corrupt state, broken precondition).
class contract_error : public error {
public:
    using error::error;
};

/// The operation is not defined for this variant of the input.
class unsupported_error : public error {
public:
    using error::error;
};

/// A numerical engine could not reach the requested accuracy. Carries the
/// best estimate produced so far and the error bound actually achieved.
class numeric_error : public error {
public:
    numeric_error(const std::string& what, double estimate, double achieved_bound)
        : error(what), estimate_(estimate), achieved_bound_(achieved_bound) {}

    double estimate() const noexcept { return estimate_; }
    double achieved_bound() const noexcept { return achieved_bound_; }

private:
    double estimate_;
    double achieved_bound_;
};

} // namespace cohrec

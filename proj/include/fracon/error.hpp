#pragma once

#include <stdexcept>
#include <string>

namespace fracon {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument or a domain-type invariant was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A numerical routine (eigen-solver, integrator) failed to produce a result.
class ComputationError : public Error {
public:
    using Error::Error;
};

/// A closed-form bound was requested for a system outside its hypotheses
/// (asymmetric topology, fractional order where integer order is required, ...).
class InapplicableBound : public Error {
public:
    using Error::Error;
};

/// Malformed or invalid scenario file. `key()` names the offending entry.
class ParseError : public Error {
public:
    ParseError(std::string key, const std::string& what)
        : Error(key.empty() ? what : "'" + key + "': " + what), key_(std::move(key)) {}

    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace fracon

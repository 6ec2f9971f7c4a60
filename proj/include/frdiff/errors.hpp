#pragma once

#include <stdexcept>
#include <string>

namespace frdiff {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument outside the supported domain (bad alpha, t <= 0, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Evaluation requested exactly on a non-removable singularity.
class SingularityError : public Error {
public:
    explicit SingularityError(const std::string& msg) : Error(msg) {}
};

// An iteration or series failed to reach the requested tolerance.
class ConvergenceError : public Error {
public:
    explicit ConvergenceError(const std::string& msg) : Error(msg) {}
};

// Wrong evaluation regime for the requested method.
class RegimeError : public Error {
public:
    explicit RegimeError(const std::string& msg) : Error(msg) {}
};

// Requested case outside the implemented branch table / dimension range.
class UnsupportedError : public Error {
public:
    explicit UnsupportedError(const std::string& msg) : Error(msg) {}
};

}  // namespace frdiff

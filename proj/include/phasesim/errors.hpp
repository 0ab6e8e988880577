#ifndef PHASESIM_ERRORS_HPP
#define PHASESIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace phasesim {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid domain values or violated operation preconditions.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// Malformed or inconsistent scenario configuration text.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Numerical failure detected at run time (mass leak, truncated domain,
/// closure breakdown, undersized probability window).
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

/// Filesystem failure while emitting results.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace phasesim

#endif

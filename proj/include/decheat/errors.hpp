#pragma once

#include <stdexcept>
#include <string>

namespace decheat {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input problems with a mesh. Subclassed by the stage that detected them.
class MeshError : public Error {
public:
    using Error::Error;
};

class ParseError : public MeshError {
public:
    ParseError(std::size_t line, const std::string& what)
        : MeshError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class TopologyError : public MeshError {
public:
    using MeshError::MeshError;
};

class GeometryError : public MeshError {
public:
    using MeshError::MeshError;
};

/// Invalid configuration values (time step, bounds, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Linear solver did not converge or broke down.
class SolverError : public Error {
public:
    using Error::Error;
};

/// A time step produced a non-finite value or hit a non-positive denominator.
class NumericalError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace decheat

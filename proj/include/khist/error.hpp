#pragma once

#include <stdexcept>
#include <string>

namespace khist {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A point or region lies outside the domain.
class DomainError : public Error {
public:
    using Error::Error;
};

// Zero-volume region or zero-mass function where a positive one is required.
class DegenerateError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

// Inputs that do not share a domain or grid.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A rectangle that is not dyadic for its grid, or an off-grid vertex.
class StructureError : public Error {
public:
    using Error::Error;
};

class UnsupportedDomainError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, long line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

// Exhaustive enumeration would exceed its configured guard.
class OracleTooLarge : public Error {
public:
    using Error::Error;
};

}  // namespace khist

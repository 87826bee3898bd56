#ifndef MPLEX_ERROR_HPP
#define MPLEX_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mplex {

// Base for every error raised by the library. `kind()` is the short tag
// used in structured CLI error records.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

// Shape or geometry problems: missing blocks, mismatched sizes.
class StructuralError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "structural"; }
};

// Values outside their admissible range (probabilities, labels, non-finite input).
class DomainError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "domain"; }
};

// Bad arguments or configuration detected before any computation.
class ValidationError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "validation"; }
};

// Input is well-formed but carries no usable signal (e.g. all-zero matrix).
class DegenerateInputError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "degenerate"; }
};

// Malformed files. Carries the offending line when known.
class ParseError : public Error {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : Error(path + ":" + std::to_string(line) + ": " + what), path_(path), line_(line) {}
    const char* kind() const noexcept override { return "parse"; }
    const std::string& path() const noexcept { return path_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string path_;
    std::size_t line_;
};

}  // namespace mplex

#endif  // MPLEX_ERROR_HPP

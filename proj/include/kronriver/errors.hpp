#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace kronriver {

/// Base class for all library errors. Every error carries a short
/// machine-parsable code (stable identifier) and a human message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg)
        : std::runtime_error(msg), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// A caller-supplied value violates a documented precondition.
class InvalidInputError : public Error {
public:
    explicit InvalidInputError(const std::string& msg) : Error("INVALID_INPUT", msg) {}
};

/// A file could not be parsed (malformed JSON, bad matrix header, ...).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error("PARSE", msg) {}
};

/// Filesystem trouble: missing file, unwritable path.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error("IO", msg) {}
};

/// An operation would exceed an explicit size guard.
class GuardError : public Error {
public:
    explicit GuardError(const std::string& msg) : Error("GUARD_EXCEEDED", msg) {}
};

/// Belief vectors whose compatible mass is zero; the normalization
/// used throughout the factored representation does not exist.
class DegenerateBeliefsError : public Error {
public:
    explicit DegenerateBeliefsError(const std::string& msg) : Error("DEGENERATE_BELIEFS", msg) {}
};

/// An internal structural invariant failed (non-triangular factor,
/// mismatched dimensions between stored operators, corrupt bundle).
class ContractError : public Error {
public:
    explicit ContractError(const std::string& msg) : Error("CONTRACT", msg) {}
};

} // namespace kronriver

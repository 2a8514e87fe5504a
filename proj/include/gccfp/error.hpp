#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gccfp {

// Base error carrying a short machine-readable tag ("parse-error", ...).
// The CLI prints the tag on stderr; tests match on it.
class Error : public std::runtime_error {
public:
    Error(std::string tag, const std::string& message)
        : std::runtime_error(message), tag_(std::move(tag)) {}

    const std::string& tag() const noexcept { return tag_; }

private:
    std::string tag_;
};

struct ParseError : Error {
    explicit ParseError(const std::string& m) : Error("parse-error", m) {}
};

struct BoundsError : Error {
    explicit BoundsError(const std::string& m) : Error("bounds-error", m) {}
};

struct ShapeError : Error {
    explicit ShapeError(const std::string& m) : Error("shape-error", m) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& m) : Error("validation-error", m) {}
};

struct SizeError : Error {
    explicit SizeError(const std::string& m) : Error("size-error", m) {}
};

struct FileNotFoundError : Error {
    explicit FileNotFoundError(const std::string& m) : Error("file-not-found", m) {}
};

struct IoError : Error {
    explicit IoError(const std::string& m) : Error("io-error", m) {}
};

struct InternalError : Error {
    explicit InternalError(const std::string& m) : Error("internal-error", m) {}
};

// Non-finite value met while evaluating an objective term; carries the term name.
class NumericError : public Error {
public:
    NumericError(std::string term, const std::string& message)
        : Error("numeric-error", message), term_(std::move(term)) {}

    const std::string& term() const noexcept { return term_; }

private:
    std::string term_;
};

} // namespace gccfp

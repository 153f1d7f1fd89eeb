#pragma once

#include <stdexcept>
#include <string>

namespace vlasym {

/// Base class of every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DivisionByZero : public Error {
public:
    using Error::Error;
};

/// A z-substitution or evaluation landed on a pole.
class PoleError : public Error {
public:
    using Error::Error;
};

/// Evaluation outside the real branch (negative base, fractional exponent).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Precondition of an operation violated (bad parameter, degenerate input).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// ODE integration hit a zero of the leading coefficient.
class SingularPoint : public Error {
public:
    SingularPoint(const std::string& what, double where) : Error(what), location(where) {}
    double location;
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line_, int column_)
        : Error(std::to_string(line_) + ":" + std::to_string(column_) + ": " + msg),
          line(line_), column(column_), message(msg) {}
    int line;
    int column;
    std::string message;
};

/// Source position carried by errors raised while elaborating parsed text.
struct Located {
    int line = 0;
    int column = 0;
};

/// An error of type E tied to a position in the input.
template <class E>
class At : public E, public Located {
public:
    At(const std::string& msg, int line_, int column_)
        : E(std::to_string(line_) + ":" + std::to_string(column_) + ": " + msg), Located{line_, column_} {}
};

} // namespace vlasym

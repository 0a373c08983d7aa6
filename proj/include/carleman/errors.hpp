#pragma once

#include <stdexcept>
#include <string>

namespace carleman {

/// Base class of all errors thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A requested dimension exceeds the global size guard (see sparse.hpp).
struct AssemblyLimitExceeded : Error {
  using Error::Error;
};

/// An operation requiring a square matrix received a rectangular one.
struct NonSquareMatrix : Error {
  using Error::Error;
};

/// Vector/matrix dimensions do not agree.
struct DimensionMismatch : Error {
  using Error::Error;
};

/// A monomial of total degree zero was supplied; the model requires f(0) = 0.
struct DegreeZeroTerm : Error {
  using Error::Error;
};

/// A monomial's exponent vector does not have length n.
struct ExponentLengthMismatch : Error {
  using Error::Error;
};

/// A bound that needs the a-priori solution bound alpha was evaluated without one.
struct MissingAlpha : Error {
  using Error::Error;
};

/// A bound comparison was requested at or beyond its validity horizon.
struct HorizonExceeded : Error {
  using Error::Error;
};

/// Parse failure with a 1-based source location (line 0 = no location).
struct ParseError : Error {
  int line;
  int col;
  ParseError(const std::string& msg, int line_, int col_)
      : Error(line_ > 0 ? msg + " (line " + std::to_string(line_) + ", column " +
                              std::to_string(col_) + ")"
                        : msg),
        line(line_),
        col(col_) {}
};

/// Malformed input text (DSL or JSON).
struct SyntaxError : ParseError {
  using ParseError::ParseError;
};

/// An identifier that is neither a state variable nor a declared parameter.
struct UnknownIdentifier : ParseError {
  using ParseError::ParseError;
};

/// The expanded right-hand side contains a nonzero constant term.
struct ConstantTermError : ParseError {
  using ParseError::ParseError;
};

}  // namespace carleman

#pragma once

#include <stdexcept>
#include <string>

namespace gcnmwis {

/// Base for every error raised by the library. The CLI maps the derived
/// types onto distinct process exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Out-of-range generator, solver or training parameter.
class ParameterError : public Error {
public:
  using Error::Error;
};

/// Matrix or vector shape does not match the graph.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// Non-finite value encountered (input weights, activations, loss).
class NumericError : public Error {
public:
  using Error::Error;
};

/// Malformed graph, network, model or config file.
class ParseError : public Error {
public:
  ParseError(const std::string &what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class IoError : public Error {
public:
  using Error::Error;
};

/// A node list that contains two adjacent nodes.
class NotIndependentError : public Error {
public:
  NotIndependentError(int a, int b)
      : Error("not independent: edge (" + std::to_string(a) + ", " + std::to_string(b) +
              ") has both endpoints in the set"),
        a_(a), b_(b) {}

  int first() const noexcept { return a_; }
  int second() const noexcept { return b_; }

private:
  int a_, b_;
};

/// Ratio or reward whose denominator is zero.
class UndefinedRatioError : public Error {
public:
  using Error::Error;
};

} // namespace gcnmwis

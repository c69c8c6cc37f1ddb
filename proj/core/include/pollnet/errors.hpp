#ifndef POLLNET_ERRORS_HPP
#define POLLNET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pollnet {

/// Malformed input documents (JSON syntax, schema violations). CLI exit code 2.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Model-level validation failures (assumption violations, not overloaded). CLI exit code 3.
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// Numeric failures (singular systems, eigensolver non-convergence, event caps). CLI exit code 4.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pollnet

#endif

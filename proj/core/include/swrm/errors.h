#ifndef SWRM_ERRORS_H_
#define SWRM_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace swrm {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A dataset record could not be parsed. line() is 1-based.
class LoadError : public Error {
 public:
  LoadError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A record parsed but violates a data invariant (range, shape, finiteness).
class SchemaError : public Error {
 public:
  using Error::Error;
};

class AuditError : public Error {
 public:
  using Error::Error;
};

class LexiconError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class MetricError : public Error {
 public:
  using Error::Error;
};

// Raised by language-model adapters. Transient failures may succeed on retry
// (I/O hiccup); permanent ones will not (missing entry, k beyond capability).
class AdapterError : public Error {
 public:
  enum class Kind { kTransient, kPermanent };
  AdapterError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }
  bool transient() const { return kind_ == Kind::kTransient; }

 private:
  Kind kind_;
};

// Training produced a non-finite value. role() names the first offending tensor.
class DivergenceError : public Error {
 public:
  DivergenceError(std::string role, const std::string& what)
      : Error(what), role_(std::move(role)) {}
  const std::string& role() const { return role_; }

 private:
  std::string role_;
};

}  // namespace swrm

#endif  // SWRM_ERRORS_H_

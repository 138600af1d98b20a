#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pnet {

// Every library failure derives from Error so callers can catch one type.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Wrong vector length, non-finite input, mismatched columns.
class InputShapeError : public Error {
public:
  using Error::Error;
};

// Bad parameter values (chi outside (0,2], split outside (0,1), ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

// File contents that cannot be used: malformed CSV, missing label column.
class DataError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  enum class Kind {
    malformed,
    unknown_key,
    dangling_reference,
    cyclic_reference,
    duplicate_id,
    no_output,
  };

  ParseError(Kind kind, std::size_t line, const std::string& detail);

  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

private:
  Kind kind_;
  std::size_t line_;
};

const char* to_string(ParseError::Kind kind) noexcept;

// The training design has zero Frobenius norm, so the projection step is undefined.
class DegenerateDesignError : public Error {
public:
  using Error::Error;
};

class GrowthFailure : public Error {
public:
  GrowthFailure(const std::string& what, std::size_t attempts)
      : Error(what), attempts_(attempts) {}
  std::size_t attempts() const noexcept { return attempts_; }

private:
  std::size_t attempts_;
};

// A ratio metric whose denominator is zero.
class UndefinedMetric : public Error {
public:
  using Error::Error;
};

// A failure inside one seeded run of a repeated experiment.
class RunFailure : public Error {
public:
  RunFailure(std::uint64_t seed, const std::string& what);
  std::uint64_t seed() const noexcept { return seed_; }

private:
  std::uint64_t seed_;
};

}  // namespace pnet

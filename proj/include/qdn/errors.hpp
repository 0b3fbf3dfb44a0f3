#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qdn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A qubit or basis index exceeds the register it is bound to.
class OutOfRangeError : public Error {
  public:
    using Error::Error;
};

/// Two operands live on registers of different rank.
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// A state handed to a probability query is not unit norm.
class NormalizationError : public Error {
  public:
    using Error::Error;
};

/// A precondition on a plain argument was violated.
class ArgumentError : public Error {
  public:
    using Error::Error;
};

/// Strict stage evolution met a fired generator that has no rule.
class MissingRuleError : public Error {
  public:
    MissingRuleError(unsigned generator, const std::string &what)
        : Error(what), generator_(generator) {}

    unsigned generator() const noexcept { return generator_; }

  private:
    unsigned generator_;
};

/// A stage (or a whole program) does not conserve probability.
class ValidationError : public Error {
  public:
    ValidationError(std::size_t stage, double deviation,
                    const std::string &what)
        : Error(what), stage_(stage), deviation_(deviation) {}

    std::size_t stage() const noexcept { return stage_; }
    double deviation() const noexcept { return deviation_; }

  private:
    std::size_t stage_;
    double deviation_;
};

/// The operation requires rank-1 stages and was handed something else.
class UnsupportedStructureError : public Error {
  public:
    using Error::Error;
};

/// A brute-force computation would exceed its configured budget.
class ResourceError : public Error {
  public:
    using Error::Error;
};

/// No object with the requested shape exists (e.g. more orthonormal rows
/// than columns).
class InfeasibleError : public Error {
  public:
    using Error::Error;
};

} // namespace qdn

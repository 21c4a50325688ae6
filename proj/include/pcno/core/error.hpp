#pragma once

#include <stdexcept>
#include <string>

namespace pcno {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Bad command-line usage or configuration keys.
class UsageError : public Error
{
public:
  using Error::Error;
};

/// A shape, format or precondition violation in the data handed to an operation.
class ContractError : public Error
{
public:
  using Error::Error;
};

/// Malformed or truncated file contents, or a failed read/write.
class FormatError : public ContractError
{
public:
  using ContractError::ContractError;
};

/// Numerical failure: blow-up, CFL violation, timestep underflow, divergent training.
class NumericalError : public Error
{
public:
  using Error::Error;
};

inline void require(bool condition, const std::string& message)
{
  if (!condition)
    throw ContractError(message);
}

} // namespace pcno

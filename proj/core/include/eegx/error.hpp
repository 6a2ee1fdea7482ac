#pragma once

#include <stdexcept>
#include <string>

namespace eegx {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input problems: the caller handed us something that cannot be used.
class FormatError : public Error { using Error::Error; };
class DataError : public Error { using Error::Error; };
class ValidationError : public Error { using Error::Error; };
class UsageError : public Error { using Error::Error; };
class LookupError : public Error { using Error::Error; };

// Computation problems.
class SizeError : public Error { using Error::Error; };
class DesignError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class FitError : public Error { using Error::Error; };

/// Too few joint tail exceedances to estimate extremal dependence at the requested level.
class SparseTailError : public Error { using Error::Error; };

}  // namespace eegx

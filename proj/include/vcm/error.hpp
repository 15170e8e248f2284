#pragma once

#include <stdexcept>
#include <string>

namespace vcm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Integration failures. The maximal interval of the solution may have ended
// before the requested time; these are how that surfaces.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

class StepLimitExceeded : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

class DomainExit : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

class StepSizeUnderflow : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class NonElliptic : public Error {
 public:
  using Error::Error;
};

class SingularElement : public Error {
 public:
  using Error::Error;
};

class SingularNeighborhood : public Error {
 public:
  using Error::Error;
};

class IllConditioned : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace vcm

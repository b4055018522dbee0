#pragma once

#include <stdexcept>
#include <string>

namespace gkflab {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition or type invariant was violated by the caller.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The requested grid does not resolve the field (spacing too coarse for ell).
class ResolutionError : public Error {
 public:
  using Error::Error;
};

// The request is well formed but outside what the implementation supports.
class Unsupported : public Error {
 public:
  using Error::Error;
};

// A least-squares fit was too ill-conditioned to trust.
class IllConditioned : public Error {
 public:
  using Error::Error;
};

}  // namespace gkflab

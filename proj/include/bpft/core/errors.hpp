#pragma once

#include <stdexcept>
#include <string>

namespace bpft {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateWeightsError : public Error {
 public:
  using Error::Error;
};

class ModelEvaluationError : public Error {
 public:
  using Error::Error;
};

/// Every posterior particle got zero likelihood for the observation.
class DegeneratePosteriorError : public Error {
 public:
  using Error::Error;
};

/// A log argument of the entropy estimator vanished under a nonzero weight.
class DegenerateEntropyError : public Error {
 public:
  using Error::Error;
};

class UnsupportedModelError : public Error {
 public:
  using Error::Error;
};

class AlreadyConvergedError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Raised when tree bookkeeping is violated; always a bug.
class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace bpft

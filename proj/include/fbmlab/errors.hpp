#pragma once

#include <stdexcept>
#include <string>

namespace fbmlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreconditionError : Error {
  using Error::Error;
};

// A sampler ran past its configured maximum number of steps.
struct SafetyCapError : Error {
  using Error::Error;
};

struct InfeasibleError : Error {
  using Error::Error;
};

struct InsufficientSampleError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw PreconditionError(what);
}

}  // namespace fbmlab

#pragma once

#include <stdexcept>
#include <string>

namespace intervenidar {

// Base for every error raised by this library. Callers that only care about
// "something in the harness failed" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a file or message does not parse or fails schema checks.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Raised when a trajectory/config pairing does not match (different
// environment id or config hash).
class ConfigMismatchError : public Error {
 public:
  using Error::Error;
};

// Raised by an agent when it cannot produce an action (timeouts, malformed
// responses, out-of-range actions). run_episode turns it into an aborted
// trajectory instead of propagating it.
class AgentError : public Error {
 public:
  using Error::Error;
};

}  // namespace intervenidar

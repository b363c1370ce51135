#pragma once

#include <stdexcept>
#include <string>

namespace vft {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeometryError : Error {
  using Error::Error;
};

// Malformed scenario or config document.
struct ParseError : Error {
  using Error::Error;
};

// Well-formed document that violates a scene invariant. The message names the
// invariant and the offending object ids, e.g. "overlap: a,b".
struct ValidationError : Error {
  using Error::Error;
};

struct InvalidActionError : Error {
  using Error::Error;
};

struct NoActionsError : Error {
  NoActionsError() : Error("no push actions available from this state") {}
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace vft

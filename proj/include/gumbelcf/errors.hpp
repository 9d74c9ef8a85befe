#pragma once

#include <stdexcept>
#include <string>

namespace gumbelcf {

/// Base class for every error this library throws deliberately.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numeric argument outside the operation's domain (u outside (0,1), non-finite bound, ...).
struct DomainError : Error {
  using Error::Error;
};

/// Malformed user-supplied data: datasets, references, unmappable text.
struct InputError : Error {
  using Error::Error;
};

/// Invalid configuration: bad spec fields, empty corpora, inconsistent grids.
struct ConfigError : Error {
  using Error::Error;
};

/// A model violated its contract (non-finite logits, wrong vector length).
struct ModelError : Error {
  using Error::Error;
};

/// On-disk format violation; the message names the offending offset or line.
struct FormatError : Error {
  using Error::Error;
};

/// Logit-server protocol failure; the message quotes the offending frame.
struct ConnectionError : Error {
  using Error::Error;
};

/// Replay refused because the trace was recovered under a different model.
struct FingerprintMismatch : Error {
  using Error::Error;
};

}  // namespace gumbelcf

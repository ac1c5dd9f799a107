#pragma once

#include <stdexcept>
#include <string>

namespace nflood {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// WAV container is truncated or structurally invalid.
class WavFormatError : public Error {
 public:
  using Error::Error;
};

/// WAV is well formed but not 16-bit mono PCM.
class UnsupportedEncodingError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration, arguments, or model/config mismatch.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data (CSV rows, manifests, model files, label sets).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A classifier could not produce a label.
class ClassifierError : public Error {
 public:
  using Error::Error;
};

/// External classifier process could not be started or never became ready.
class SpawnError : public ClassifierError {
 public:
  using ClassifierError::ClassifierError;
};

/// External classifier answered with something the protocol does not allow.
class ProtocolError : public ClassifierError {
 public:
  using ClassifierError::ClassifierError;
};

}  // namespace nflood

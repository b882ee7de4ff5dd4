#pragma once

#include <stdexcept>
#include <string>

namespace dacdr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes do not conform (dimension mismatch between operands).
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A call violates an operation's precondition (empty input, bad scalar, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// An id is outside the addressed table / vocabulary.
class IndexError : public Error {
 public:
  using Error::Error;
};

// A data file could not be ingested (bad header, too many malformed rows,
// unknown domain, missing file).
class IngestError : public Error {
 public:
  using Error::Error;
};

// The evaluation protocol cannot be applied (e.g. no overlapping users).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Bad run configuration (unknown key, invalid pairing, missing path).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Training failure (non-finite loss or gradient).
class TrainError : public Error {
 public:
  using Error::Error;
};

// A metric is undefined on the given input (single-class AUC, empty lists).
class MetricError : public Error {
 public:
  using Error::Error;
};

// An operation was called in the wrong order (e.g. gradient report before
// any backward pass).
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace dacdr

#pragma once

#include <stdexcept>
#include <string>

namespace graphdissect {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dataset file could not be read.
struct IngestionError : Error {
  using Error::Error;
};

// Dataset file exists but is malformed.
struct FormatError : Error {
  using Error::Error;
};

// Inconsistent or invalid configuration / preconditions.
struct ConfigError : Error {
  using Error::Error;
};

// Concept evaluation failure (e.g. label predicate on an unlabeled graph).
struct EvalError : Error {
  using Error::Error;
};

// Synthetic dataset generation failure.
struct GenerationError : Error {
  using Error::Error;
};

// Neuron has no positive activation anywhere in the dataset.
struct DeadNeuronError : Error {
  using Error::Error;
};

// Exhaustive enumeration would exceed the configured cap.
struct SearchSpaceError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace graphdissect

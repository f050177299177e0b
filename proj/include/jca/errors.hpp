#pragma once

#include <stdexcept>
#include <string>

namespace jca {

// Shape disagreement between operands. Message names both shapes.
struct DimError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Bad on-disk data: wrong magic, truncated payload, non-finite entries.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid user-supplied configuration value.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Tracks or feature sets that should share a length/size but do not.
struct AlignError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A graph evaluation produced a non-finite value.
struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem problem (unopenable/unwritable path).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Checkpoint does not match the requested model (dims, variant).
struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A requested id does not exist in the manifest.
struct LookupError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace jca

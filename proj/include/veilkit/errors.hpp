#pragma once

#include <stdexcept>
#include <string>

namespace veilkit {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration: bad regex, unknown fields, out-of-range settings.
struct ConfigError : Error {
    using Error::Error;
};

// Data violates a documented invariant (offsets, surfaces, overlaps, ...).
struct DataError : Error {
    using Error::Error;
};

struct Utf8Error : DataError {
    using DataError::DataError;
};

// External NER adapter misbehaved: bad handshake, protocol violation,
// offsets out of range. Carries document id and offending record where known.
struct AdapterError : Error {
    using Error::Error;
};

// A metric was requested on input for which it is mathematically undefined.
struct UndefinedMetricError : Error {
    using Error::Error;
};

// Raised by noise_profile when the non-voice material cannot fill a single
// analysis frame; callers are expected to fall back to pass-through.
struct InsufficientNoiseError : Error {
    using Error::Error;
};

// Pipeline stage failure wrapper: remembers which stage and document failed.
struct StageError : Error {
    std::string stage;
    std::string doc_id;
    StageError(std::string stage_name, std::string document_id, const std::string& message)
        : Error(message), stage(std::move(stage_name)), doc_id(std::move(document_id)) {}
};

} // namespace veilkit

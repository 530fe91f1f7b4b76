#pragma once

#include <stdexcept>
#include <string>

namespace snnattack {

// Inconsistent shapes, invalid layer geometry, malformed experiment setup.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numeric argument outside its mathematical domain (probability, width, label).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Broken file contents: bad magic, truncation, checksum mismatch.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// API misuse that a correct caller never triggers.
struct UsageError : std::logic_error {
    using std::logic_error::logic_error;
};

} // namespace snnattack

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace epsent {

/// Argument outside the mathematical domain of an operation.
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Inputs that are individually valid but contradict each other
/// (e.g. a nonzero mismatch probability with zero noise).
class consistency_error : public domain_error {
public:
    using domain_error::domain_error;
};

/// A configured size cap would be exceeded.
class resource_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or truncated compressed stream.
class decode_error : public std::runtime_error {
public:
    decode_error(const std::string& what, std::size_t byte_offset)
        : std::runtime_error(what + " (at byte " + std::to_string(byte_offset) + ")"),
          offset_(byte_offset) {}

    std::size_t byte_offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Invalid run configuration. `field()` names the offending key.
class config_error : public std::invalid_argument {
public:
    config_error(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace epsent

#pragma once

#include <stdexcept>
#include <string>

namespace autocompose {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& what, int line = -1)
        : std::runtime_error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_number(line) {}
    int line_number;
};

struct StorageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

struct RegistrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CatalogError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed bytes on the wire; offset points at the offending byte.
struct ProtocolError : std::runtime_error {
    ProtocolError(const std::string& what, std::size_t offset = 0)
        : std::runtime_error(what + " (offset " + std::to_string(offset) + ")"),
          byte_offset(offset) {}
    std::size_t byte_offset;
};

// Connection-level failure (refused, timeout); distinct from ProtocolError.
struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace autocompose

#pragma once

#include <stdexcept>
#include <string>

namespace divlab {

/// Caller violated a documented precondition (bad index, length mismatch, ...).
struct UsageError : std::invalid_argument {
    explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

/// The request is well-formed but outside what this build can compute exactly
/// (e.g. exact enumeration above the configured size limit). Callers may fall
/// back to sampling.
struct CapabilityError : std::runtime_error {
    explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace divlab

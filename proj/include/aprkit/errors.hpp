#pragma once

#include <stdexcept>
#include <string>

namespace aprkit {

// Out-of-range (l, z, x) queries and similar precondition failures.
class RangeError : public std::out_of_range {
public:
    explicit RangeError(const std::string& msg) : std::out_of_range(msg) {}
};

// Corrupt or inconsistent sparse structure detected at runtime.
class IntegrityError : public std::runtime_error {
public:
    explicit IntegrityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Request exceeds a configured capability (e.g. stencil extent, y dimension).
class CapabilityError : public std::runtime_error {
public:
    explicit CapabilityError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad magic, version or header contents.
class BadFormatError : public IoError {
public:
    explicit BadFormatError(const std::string& msg) : IoError(msg) {}
};

// File ends before the declared payload.
class TruncatedFileError : public IoError {
public:
    explicit TruncatedFileError(const std::string& msg) : IoError(msg) {}
};

} // namespace aprkit

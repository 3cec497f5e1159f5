// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace lbdem {

/// Invalid or inconsistent scenario configuration. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure at run time (instability, unphysical state). CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Cross-block synchronization violated an invariant (lost particle,
/// unknown id in a reduction, stale ghost). CLI exit code 3.
class SyncError : public std::runtime_error {
public:
    explicit SyncError(const std::string& what) : std::runtime_error(what) {}
};

/// File I/O failure, always carries the offending path. CLI exit code 4.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lbdem

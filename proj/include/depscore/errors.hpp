#pragma once

#include <stdexcept>

namespace depscore {

/// A request that is well-formed but has no meaningful answer for the data
/// (unknown tuple, empty filter, single-class labels, ...).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable input or unwritable output.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace depscore

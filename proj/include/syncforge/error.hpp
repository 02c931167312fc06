#pragma once

#include <stdexcept>
#include <string>

namespace syncforge {

/// Raised when a computation cannot deliver a result that meets its
/// postconditions: a numerically reduced matrix, a matrix that is not
/// singular when it must be, a diverging integration.
///
/// Precondition violations on the inputs use std::invalid_argument.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace syncforge

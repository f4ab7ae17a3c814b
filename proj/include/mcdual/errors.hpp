#pragma once

#include <stdexcept>
#include <string>

namespace mcdual {

/// Input violates a documented precondition (bad spectral data, dimension
/// mismatch, energy outside the admissible region, ...).
class validation_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not deliver its postcondition
/// (step-size underflow, lost flux conservation, ...).
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mcdual

#pragma once

#include <stdexcept>
#include <string>

namespace latcurrent {

// Bad inputs (shapes, ranges, incompatible options). CLI maps this to exit 2.
using ValidationError = std::invalid_argument;

// A solver or integrator failed to reach its tolerance. CLI maps this to exit 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace latcurrent

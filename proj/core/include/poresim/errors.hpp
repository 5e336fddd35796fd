#ifndef PORESIM_ERRORS_HPP
#define PORESIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace poresim {

/// Bad user input: malformed files, out-of-range parameters, violated preconditions
/// that a caller can fix.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure at run time: solver non-convergence, invariant violations.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace poresim

#endif

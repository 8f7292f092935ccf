#pragma once

#include <stdexcept>
#include <string>

namespace fraclab {

// Numerical non-convergence or an unresolvable discretization.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad arguments (outside an operation's domain).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace fraclab

#ifndef PESVLAB_ERRORS_HPP
#define PESVLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pesvlab {

/// Thrown when matrix or batch dimensions do not chain.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when an argument lies outside the domain of a formula or operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Thrown when an operation is not defined for the given activation or configuration.
class UnsupportedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace pesvlab

#endif // PESVLAB_ERRORS_HPP

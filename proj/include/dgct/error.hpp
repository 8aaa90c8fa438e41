#pragma once

#include <stdexcept>
#include <string>

namespace dgct {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Array sizes or image sides that do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A scalar parameter outside its admissible range (p, eta, beta, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed files: sidecars, weight containers, manifests.
class ParseError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: violated step condition or non-finite values.
class NumericalError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void require_dims(bool ok, const std::string& what)
{
    if (!ok)
        throw DimensionError(what);
}

inline void require_domain(bool ok, const std::string& what)
{
    if (!ok)
        throw DomainError(what);
}

} // namespace detail
} // namespace dgct

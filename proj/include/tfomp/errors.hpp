#pragma once

#include <stdexcept>
#include <string>

namespace tfomp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A matrix that must have full column rank does not (numerically).
class RankDeficient : public Error {
public:
    using Error::Error;
};

class InvalidDimension : public Error {
public:
    using Error::Error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// An exhaustive enumeration would exceed its budget.
class TooLarge : public Error {
public:
    using Error::Error;
};

/// A pursuit trace is too short for the requested statistic.
class EmptyTrace : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed or out-of-domain experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace tfomp

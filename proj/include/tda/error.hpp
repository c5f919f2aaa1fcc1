#pragma once

#include <stdexcept>
#include <string>

namespace tda {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input files or arguments.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A marker is constant within a class, or a class has too few rows.
class DegenerateData : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

/// The requested operation needs a shared transformation (Location / LocationScale).
class UnsupportedFamily : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

class SingularCovariance : public Error {
public:
    using Error::Error;
};

class AllMissing : public Error {
public:
    using Error::Error;
};

class EmptySubset : public Error {
public:
    using Error::Error;
};

class TooManyMarkers : public Error {
public:
    using Error::Error;
};

class TooManyFailures : public Error {
public:
    using Error::Error;
};

} // namespace tda

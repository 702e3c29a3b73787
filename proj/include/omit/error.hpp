#pragma once

#include <stdexcept>
#include <string>

namespace omit {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameters : public Error {
public:
    using Error::Error;
};

class UnknownPreset : public Error {
public:
    using Error::Error;
};

// |d(omega)| fell below the guard threshold while evaluating a transfer function.
class PoleError : public Error {
public:
    PoleError(const std::string& what, double omega) : Error(what), omega_(omega) {}
    double omega() const noexcept { return omega_; }

private:
    double omega_;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

class RootResidualError : public Error {
public:
    using Error::Error;
};

class NoDipError : public Error {
public:
    using Error::Error;
};

}  // namespace omit

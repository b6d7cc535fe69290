#pragma once

#include <stdexcept>
#include <string>

namespace rotpro {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad arguments, malformed files, out-of-range ids.
class InputError : public Error {
public:
    using Error::Error;
};

// Filesystem / serialization failures.
class IoError : public Error {
public:
    using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    using Error::Error;
};

} // namespace rotpro

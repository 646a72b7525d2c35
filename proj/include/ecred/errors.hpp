#pragma once

#include <stdexcept>
#include <string>

namespace ecred {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Precondition violations on caller-supplied values.
class InputError : public Error {
public:
    using Error::Error;
};

// Work exceeding a configured ceiling (prime bound, degree guard, factoring limit).
class ResourceError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    ParseError(const std::string& what, std::size_t position)
        : InputError(what + " at position " + std::to_string(position)), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class SingularModelError : public InputError {
public:
    using InputError::InputError;
};

class UnsupportedPrimeError : public InputError {
public:
    using InputError::InputError;
};

// Resolver failures.
class NetworkError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class DataIntegrityError : public Error {
public:
    using Error::Error;
};

}  // namespace ecred

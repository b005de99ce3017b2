#pragma once

#include <stdexcept>
#include <string>

namespace dtwin {

// Bad input, violated invariant or precondition. CLI exit code 1.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical failure: simulator blow-up, non-finite objective, diverging training. CLI exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File could not be read or written. CLI exit code 3.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool cond, const std::string& what) {
    if (!cond) throw ValidationError(what);
}
}  // namespace detail

}  // namespace dtwin

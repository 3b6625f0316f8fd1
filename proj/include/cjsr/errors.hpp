#ifndef CJSR_ERRORS_HPP
#define CJSR_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cjsr {

/// Malformed or out-of-range input.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input that is not well-formed (bad JSON, missing or mistyped fields).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An enumeration or lift exceeded its configured size bound.
class CapExceeded : public std::runtime_error {
public:
    CapExceeded(const std::string& what_hit, std::size_t cap)
        : std::runtime_error(what_hit + " exceeded its cap of " + std::to_string(cap)),
          cap_(cap), what_hit_(what_hit)
    {
    }

    std::size_t cap() const { return cap_; }
    const std::string& limit_name() const { return what_hit_; }

private:
    std::size_t cap_;
    std::string what_hit_;
};

/// Bisection could not produce an estimate (every probe was indeterminate).
class EstimationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace cjsr

#endif

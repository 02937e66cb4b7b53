#pragma once

#include <stdexcept>
#include <string>

namespace qheat {

/// Malformed or inconsistent input (dimension mismatch, bad config field, parse error).
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Argument outside the mathematical domain of an evaluator (s <= 0, |w| >= 1, mu == 0).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A numerical procedure could not meet its accuracy contract.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qheat

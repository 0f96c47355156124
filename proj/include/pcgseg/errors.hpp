#pragma once

#include <stdexcept>
#include <string>

namespace pcgseg {

// Malformed or inconsistent input data (files, annotations, configs).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failure (divergence, non-finite values).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace pcgseg

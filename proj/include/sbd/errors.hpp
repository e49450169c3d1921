#pragma once

#include <stdexcept>
#include <string>

namespace sbd {

// Error taxonomy shared by every module. The CLI maps these onto exit
// codes: ArgumentError -> 2, DataError (and subclasses) -> 3, anything
// else -> 1.
class ArgumentError : public std::runtime_error {
public:
    explicit ArgumentError(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed file contents (bad header, short row, non-finite value...).
class FormatError : public DataError {
public:
    explicit FormatError(const std::string& what) : DataError(what) {}
};

class IoError : public DataError {
public:
    explicit IoError(const std::string& what) : DataError(what) {}
};

// Inconsistent shapes or non-finite numerics inside the math kernels.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

class ShapeError : public NumericError {
public:
    explicit ShapeError(const std::string& what) : NumericError(what) {}
};

} // namespace sbd

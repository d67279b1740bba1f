#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pvdc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tensor/operation shape disagreement; message names the offending axis.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Invalid hyperparameter or geometry (non-integer conv output size, bad rate, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Caller violated an operation precondition (empty cloud, missing features, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

// Malformed input file; message carries file and line/byte offset.
class ParseError : public Error {
public:
    using Error::Error;
};

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    os << "]";
    return os.str();
}

enum class Mode { Train, Eval };

inline const char* mode_name(Mode m) { return m == Mode::Train ? "train" : "eval"; }

} // namespace pvdc

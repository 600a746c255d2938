#pragma once

#include <stdexcept>
#include <string>

namespace mapmart {

// Malformed input: bad JSON, violated model invariants, out-of-range orders.
class SchemaError : public std::invalid_argument {
public:
    explicit SchemaError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failure that cannot be recovered from silently: an indefinite
// Gram matrix, a degenerate orthogonalization direction, and the like.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mapmart

#pragma once

#include <stdexcept>
#include <string>

namespace ergo {

// Base class for everything this library throws on purpose.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad input: malformed spec, parameter out of range, violated precondition.
struct validation_error : error {
    using error::error;
};

// Expression text that does not parse. offset is the character position.
struct parse_error : error {
    std::size_t offset;
    parse_error(const std::string& what, std::size_t off)
        : error(what), offset(off) {}
};

// Numerical failure: domain violation, divergent integral, lost bracket.
struct math_error : error {
    using error::error;
};

// Evaluating an expression outside its domain (ln of a negative, x/0, ...).
// subexpression holds the offending node, pretty-printed.
struct eval_error : math_error {
    std::string subexpression;
    eval_error(const std::string& what, std::string subexpr)
        : math_error(what), subexpression(std::move(subexpr)) {}
};

// A dynamic that no utility function can generate.
struct inconsistency_error : math_error {
    using math_error::math_error;
};

}  // namespace ergo

#pragma once

#include <stdexcept>
#include <string>

namespace polyfine {

// Exception taxonomy for the whole library. Each type maps onto one pf_status
// code at the C boundary (see polyfine.h).

struct InvalidModel : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotDeterministic : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidParams : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// line is 1-based; 0 means "no line information".
struct ParseError : std::runtime_error {
    int line;
    explicit ParseError(const std::string& msg, int line_ = 0)
        : std::runtime_error(line_ > 0 ? "line " + std::to_string(line_) + ": " + msg : msg),
          line(line_) {}
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonPositiveValue : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace polyfine

#pragma once

#include <stdexcept>
#include <string>

namespace plato {

// Usage/validation problems: bad flags, malformed files, out-of-range config.
// The CLI maps these to exit code 2.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : ValidationError {
    explicit ParseError(const std::string& msg) : ValidationError(msg) {}
};

struct ConfigError : ValidationError {
    explicit ConfigError(const std::string& msg) : ValidationError(msg) {}
};

// Runtime failures: divergence, non-convergence, numerical breakdown.
// The CLI maps these to exit code 1.
struct RuntimeFailure : std::runtime_error {
    explicit RuntimeFailure(const std::string& msg) : std::runtime_error(msg) {}
};

struct DivergenceError : RuntimeFailure {
    explicit DivergenceError(const std::string& msg) : RuntimeFailure(msg) {}
};

struct ConvergenceError : RuntimeFailure {
    explicit ConvergenceError(const std::string& msg) : RuntimeFailure(msg) {}
};

struct SingularityError : RuntimeFailure {
    explicit SingularityError(const std::string& msg) : RuntimeFailure(msg) {}
};

}  // namespace plato

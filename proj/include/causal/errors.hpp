#pragma once

#include <stdexcept>
#include <string>

namespace causal {

// Invalid physical or configuration parameter (CLI exit code 2).
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// Combinatorial guard exceeded.
class SizeLimitError : public ParameterError {
public:
    explicit SizeLimitError(const std::string& what) : ParameterError(what) {}
};

// Quadrature non-convergence, non-finite values, norm drift (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ParameterError(msg);
}

}  // namespace causal

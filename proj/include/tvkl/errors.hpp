#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tvkl {

// Raised when a standardized residual would divide by a non-positive rate.
class degenerate_lambda_error : public std::runtime_error {
public:
    degenerate_lambda_error(std::size_t row, std::size_t col, double lambda)
        : std::runtime_error("non-positive rate lambda=" + std::to_string(lambda) +
                             " at (" + std::to_string(row) + "," + std::to_string(col) + ")"),
          row_(row), col_(col), lambda_(lambda) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }
    double lambda() const noexcept { return lambda_; }

private:
    std::size_t row_;
    std::size_t col_;
    double lambda_;
};

// Raised when the ADMM iterate-change grows persistently instead of settling.
class solver_divergence_error : public std::runtime_error {
public:
    explicit solver_divergence_error(double beta, int iteration)
        : std::runtime_error("ADMM diverging at iteration " + std::to_string(iteration) +
                             " (penalty beta=" + std::to_string(beta) +
                             "); try a different beta"),
          beta_(beta), iteration_(iteration) {}

    double beta() const noexcept { return beta_; }
    int iteration() const noexcept { return iteration_; }

private:
    double beta_;
    int iteration_;
};

// Requested solver mode is incompatible with the forward operator.
class unsupported_configuration_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Bad key, missing file or malformed value in an experiment config.
class config_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace tvkl

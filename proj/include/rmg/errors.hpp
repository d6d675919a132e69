#pragma once

#include <stdexcept>
#include <string>

namespace rmg {

/// Base class for input-validation failures (malformed games, policies,
/// out-of-range parameters). The CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

class NonStochasticRow : public ValidationError {
  public:
    NonStochasticRow(int h, int s, int a, double rowsum)
        : ValidationError("kernel row (h=" + std::to_string(h) + ", s=" + std::to_string(s) +
                          ", a=" + std::to_string(a) + ") sums to " + std::to_string(rowsum)) {}
};

class RewardOutOfRange : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class SigmaOutOfRange : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class ShapeMismatch : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class NotProductDistribution : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

/// A linear solve or support search failed to certify a solution.
/// The CLI maps these to exit code 3.
class NumericalFailure : public std::runtime_error {
  public:
    explicit NumericalFailure(const std::string& msg) : std::runtime_error(msg) {}
};

/// Mixed Nash was requested for a game class we do not solve
/// (n > 2 with no pure equilibrium). Exit code 4 in the CLI.
class NashIntractable : public std::runtime_error {
  public:
    explicit NashIntractable(const std::string& msg) : std::runtime_error(msg) {}
};

class ConstructionFailed : public std::runtime_error {
  public:
    explicit ConstructionFailed(const std::string& msg) : std::runtime_error(msg) {}
};

class ParameterRegimeViolation : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class NonUniqueEquilibrium : public std::runtime_error {
  public:
    explicit NonUniqueEquilibrium(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace rmg

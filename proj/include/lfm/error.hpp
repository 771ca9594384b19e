#pragma once

#include <stdexcept>
#include <string>

namespace lfm {

/// Bad input: shapes, ranges, malformed files or flags.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The optimization produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(int iteration)
      : std::runtime_error("loss became non-finite at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

}  // namespace lfm

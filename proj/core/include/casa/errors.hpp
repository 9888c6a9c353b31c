#pragma once

#include <stdexcept>
#include <string>

namespace casa {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A block without any valid time-frequency unit cannot produce
// localization observations; callers skip such blocks.
struct EmptyBlockError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace casa

#pragma once

#include <stdexcept>

namespace fedflow {

// Error classes map 1:1 to CLI exit codes (see tools/): config=2, data=3, model=4.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fedflow

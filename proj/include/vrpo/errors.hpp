#pragma once

#include <stdexcept>
#include <string>

namespace vrpo {

// Enumeration request larger than the configured guard.
struct SizeGuardExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Conditional future-action noise is zero, so no accuracy threshold exists.
struct DegenerateVariance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidConfig : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace vrpo

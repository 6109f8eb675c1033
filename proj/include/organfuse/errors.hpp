#pragma once

#include <stdexcept>
#include <string>

namespace organfuse {

// Base class for all errors raised by this library.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A file is missing or cannot be read/written.
struct io_error : error {
  using error::error;
};

// A document is structurally malformed (bad JSON, wrong field types).
struct parse_error : error {
  using error::error;
};

// A document parsed but violates a data invariant. Messages name the
// first offending record.
struct validation_error : error {
  using error::error;
};

// A configuration is invalid or infeasible.
struct config_error : error {
  using error::error;
};

}  // namespace organfuse

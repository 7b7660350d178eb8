#pragma once

#include <stdexcept>
#include <string>

namespace sse {

// Precondition or domain violation (uncovered history, stage mismatch, ...).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An enumeration or sample cap was hit; the caller should fall back to a
// sampled path or report the cell as "---".
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Wall-clock or iteration budget exhausted.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed game file.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sse

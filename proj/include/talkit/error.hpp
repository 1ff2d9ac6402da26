#pragma once

#include <stdexcept>
#include <string>

namespace talkit {

// Invalid arguments to an operation: t <= 0, empty confidence list,
// threshold outside (0,1], infeasible simulation config.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed file content. Messages carry "<source>:<line>:" where known.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A structurally well-formed input violates its invariants. The message
// lists every violation found.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inputs that are individually valid but inconsistent with each other:
// duplicate video ids across streams, unknown video in strict evaluation,
// an ensemble with zero models.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace talkit

#pragma once

#include <stdexcept>
#include <string>

namespace troplace {

// Exit-code families used by the CLI: schema (2), infeasible (3), numerical (4).
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MalformedPartition : SchemaError {
  using SchemaError::SchemaError;
};
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : InfeasibleError {
  using InfeasibleError::InfeasibleError;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EnumerationCapExceeded : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace troplace

#pragma once

#include <stdexcept>
#include <string>

namespace impsep {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input: bad model files, rows that do not sum to
// one, partitions that do not cover the alphabet, and so on.
struct ValidationError : Error {
  using Error::Error;
};

struct UnknownSymbolError : ValidationError {
  using ValidationError::ValidationError;
};

struct UnknownLabelError : ValidationError {
  using ValidationError::ValidationError;
};

// The reachable transition graph has more than one recurrent class, is
// periodic, or otherwise fails the ergodicity requirements.
struct NonErgodicError : Error {
  using Error::Error;
};

struct NotMemorylessError : Error {
  using Error::Error;
};

struct ZeroMassPartError : Error {
  using Error::Error;
};

struct DominationPresentError : Error {
  using Error::Error;
};

// Two finite-state sources do not share state set and transition structure,
// so a per-state divergence is undefined.
struct StructureMismatchError : Error {
  using Error::Error;
};

struct BudgetExceededError : Error {
  using Error::Error;
};

struct SearchSpaceTooLargeError : BudgetExceededError {
  using BudgetExceededError::BudgetExceededError;
};

struct RejectionBudgetExceededError : BudgetExceededError {
  using BudgetExceededError::BudgetExceededError;
};

}  // namespace impsep

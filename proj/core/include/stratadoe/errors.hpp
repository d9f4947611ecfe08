#pragma once

#include <stdexcept>
#include <string>

namespace stratadoe {

// Root of all library errors. `name()` is the stable machine-readable
// identifier used by the CLI; `what()` carries context.
class Error : public std::runtime_error {
public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(what), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

private:
  std::string name_;
};

// Bad inputs or violated preconditions (CLI exit code 2).
struct ValidationError : Error {
  using Error::Error;
};

// Iterative numerics failed to converge (CLI exit code 3).
struct NumericalError : Error {
  using Error::Error;
};

// File I/O or parse failures (CLI exit code 4).
struct IoError : Error {
  IoError(const std::string& what) : Error("IoError", what) {}
};

struct DependentGenerators : ValidationError {
  DependentGenerators(const std::string& what)
      : ValidationError("DependentGenerators", what) {}
};
struct IdentityWord : ValidationError {
  IdentityWord(const std::string& what) : ValidationError("IdentityWord", what) {}
};
struct InvalidGenerator : ValidationError {
  InvalidGenerator(const std::string& what)
      : ValidationError("InvalidGenerator", what) {}
};
struct InfeasibleBlocking : ValidationError {
  InfeasibleBlocking(const std::string& what)
      : ValidationError("InfeasibleBlocking", what) {}
};
struct TubeCountViolation : ValidationError {
  TubeCountViolation(const std::string& what)
      : ValidationError("TubeCountViolation", what) {}
};
struct InconsistentLattice : ValidationError {
  InconsistentLattice(const std::string& what)
      : ValidationError("InconsistentLattice", what) {}
};
struct MissingInSelectedRows : ValidationError {
  MissingInSelectedRows(const std::string& what)
      : ValidationError("MissingInSelectedRows", what) {}
};
struct LengthMismatch : ValidationError {
  LengthMismatch(const std::string& what)
      : ValidationError("LengthMismatch", what) {}
};
struct TooFewEffects : ValidationError {
  TooFewEffects(const std::string& what)
      : ValidationError("TooFewEffects", what) {}
};
struct UnknownTerm : ValidationError {
  UnknownTerm(const std::string& what) : ValidationError("UnknownTerm", what) {}
};
struct DegenerateData : ValidationError {
  DegenerateData(const std::string& what)
      : ValidationError("DegenerateData", what) {}
};
struct NonConvergence : NumericalError {
  NonConvergence(const std::string& what)
      : NumericalError("NonConvergence", what) {}
};

}  // namespace stratadoe

#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace riobs {

// Thrown for malformed or semantically invalid configuration data (exit 65).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when the tool is invoked wrongly, e.g. a config path that does not
// exist (exit 64).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an interval framer leaves the declared operating box by more
// than the configured guard margin: the decomposition bounds are only valid
// inside the box, so continuing would silently void the guarantee (exit 1).
struct DomainEscapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a simulated truth trajectory leaves the operating box; the
// scenario (noise/attack/box) is inconsistent, not the observer (exit 1).
struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when the gain synthesis problem has no certified solution (exit 2).
struct InfeasibleError : std::runtime_error {
  int case_id;
  InfeasibleError(int c, const std::string& what)
      : std::runtime_error(what), case_id(c) {}
};

// Numeric backend failure (non-convergence, singular factorization).
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Formats v with the given number of significant digits ("%.*g"), locale
// independent. Used everywhere a number reaches a file, so outputs are
// byte-for-byte reproducible.
inline std::string fmt_sig(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace riobs

#pragma once

#include <stdexcept>
#include <string>

namespace polyheat {

/// Evaluation at the kernel's space-time singularity (or a coincident
/// target/source pair).
struct SingularityError : std::domain_error {
  using std::domain_error::domain_error;
};

/// A derivative order beyond what the profile or field was built for.
struct UnsupportedOrderError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

/// A field cannot provide the requested derivative, or (n, m) is outside the
/// supported range.
struct CapabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid domain or cylinder configuration.
struct ConstructionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An operation refused because its precondition on earlier results fails
/// (e.g. reconstruction from data judged not compatible).
struct RefusalError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Malformed run configuration; carries the offending line when known.
struct ConfigError : std::runtime_error {
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  [[nodiscard]] int line() const { return line_; }

private:
  int line_;
};

}  // namespace polyheat

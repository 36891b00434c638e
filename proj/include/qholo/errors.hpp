#pragma once

#include <stdexcept>
#include <string>

namespace qholo {

// Invalid physical or numerical input (negative squeezing, empty grid, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// A computation could not produce a trustworthy result, e.g. too many
// ensemble contributions were dropped.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  IoError(const std::string& what, std::string path)
      : std::runtime_error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace qholo

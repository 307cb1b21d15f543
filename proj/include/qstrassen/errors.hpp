#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace qstrassen {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Raised when a value violates a named invariant. The message carries the
/// invariant name and the size of the violation so callers can act on it.
class InvariantError : public Error {
 public:
  InvariantError(std::string invariant, double magnitude, const std::string& detail = {})
      : Error(format(invariant, magnitude, detail)),
        invariant_(std::move(invariant)),
        magnitude_(magnitude) {}

  const std::string& invariant() const noexcept { return invariant_; }
  double magnitude() const noexcept { return magnitude_; }

 private:
  static std::string format(const std::string& invariant, double magnitude,
                            const std::string& detail) {
    std::ostringstream os;
    os << invariant << " violated (magnitude " << magnitude << ")";
    if (!detail.empty()) os << ": " << detail;
    return os.str();
  }

  std::string invariant_;
  double magnitude_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace qstrassen

#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace wigner {

using cplx = std::complex<double>;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

/// Selects the serial reference kernels or their OpenMP counterparts.
/// Serial mode is bit-reproducible; parallel mode is reproducible only up to
/// floating-point reassociation.
enum class ExecPolicy { serial, parallel };

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live on spaces of different dimension.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A scalar parameter is outside its admissible range.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Matrix input violates a structural requirement (Hermiticity, positivity).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The occupation cutoff is too small for the requested accuracy.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, double leak, std::size_t required_cutoff)
      : Error(what), leak_(leak), required_cutoff_(required_cutoff) {}
  double leak() const noexcept { return leak_; }
  /// Cutoff that would satisfy the threshold, or 0 when unknown.
  std::size_t required_cutoff() const noexcept { return required_cutoff_; }

 private:
  double leak_;
  std::size_t required_cutoff_;
};

/// Quadrature grid does not resolve the symbol or the measure.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double estimate) : Error(what), estimate_(estimate) {}
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A computation would exceed the configured cell or dimension budget.
class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, double estimate) : Error(what), estimate_(estimate) {}
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what) : Error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace wigner

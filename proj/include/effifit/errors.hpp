#pragma once

#include <stdexcept>
#include <string>

namespace effifit {

/// Data admits no (finite, unique) circle: collinear/coincident points,
/// singular normal or moment matrix, or too few points.
class DegenerateConfiguration : public std::runtime_error {
 public:
  explicit DegenerateConfiguration(const std::string& what)
      : std::runtime_error(what) {}
};

/// Algebraic parameters with A = 0 describe a line, not a circle.
class LineCase : public std::runtime_error {
 public:
  explicit LineCase(const std::string& what) : std::runtime_error(what) {}
};

/// A weight function returned a non-positive or non-finite value.
class InvalidWeight : public std::runtime_error {
 public:
  explicit InvalidWeight(const std::string& what) : std::runtime_error(what) {}
};

/// Every Monte Carlo trial of an experiment failed.
class ExperimentFailed : public std::runtime_error {
 public:
  explicit ExperimentFailed(const std::string& what)
      : std::runtime_error(what) {}
};

/// File parse/format failure; message carries the offending line number.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace effifit

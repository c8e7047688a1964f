#pragma once

#include <stdexcept>
#include <string>

namespace anglekit {

/// Base class for all anglekit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A size or count precondition was violated (e.g. fewer than 3 points).
class InvalidSizeError : public Error {
 public:
  using Error::Error;
};

/// A node or angle index is out of range or inconsistent with the structure.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// An argument violates a non-size precondition (e.g. asymmetric distance matrix).
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/// Geometry too close to a degenerate configuration (coincident points,
/// collinear edges, angles at 0 or pi).
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// Rejection sampling exhausted its budget without an acceptable sample.
class SamplingFailureError : public Error {
 public:
  using Error::Error;
};

/// A quadrilateral constraint was evaluated at an angle of exactly 0 or pi.
class SingularConstraintError : public Error {
 public:
  using Error::Error;
};

/// Two base angles of a triangle sum to pi or more; no apex exists.
class InfeasibleTriangleError : public Error {
 public:
  using Error::Error;
};

/// The build-up routine could not place a point.
class ReconstructionFailureError : public Error {
 public:
  using Error::Error;
};

/// Alignment requested against a point set with no spread.
class DegenerateAlignmentError : public Error {
 public:
  using Error::Error;
};

/// NaN or infinity appeared where a finite value is required.
class NumericalFailureError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file (JSON, CSV).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace anglekit

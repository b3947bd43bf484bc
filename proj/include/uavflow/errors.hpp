#pragma once

#include <stdexcept>
#include <string>

namespace uavflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two endpoints of a link coincide, so distance-based path loss is undefined.
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

/// SIR denominator (interference plus safety term) is not strictly positive.
class DegenerateDenominator : public Error {
 public:
  using Error::Error;
};

/// A node has zero generalized degree; the normalized Laplacian does not exist.
class ZeroDegree : public Error {
 public:
  explicit ZeroDegree(int node)
      : Error("node " + std::to_string(node) + " has zero degree"), node_(node) {}
  int node() const { return node_; }

 private:
  int node_;
};

class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration requested on a graph above the enumeration limit.
class TooLarge : public Error {
 public:
  using Error::Error;
};

/// No power allocation satisfies the constraints. `family()` names the
/// violated constraint family ("interference", "qos", "box", "link").
class Infeasible : public Error {
 public:
  Infeasible(std::string family, const std::string& what)
      : Error("infeasible (" + family + "): " + what), family_(std::move(family)) {}
  const std::string& family() const { return family_; }

 private:
  std::string family_;
};

/// The QoS linearization point already violates the rate floor.
class InfeasibleExpansion : public Infeasible {
 public:
  explicit InfeasibleExpansion(const std::string& what) : Infeasible("qos", what) {}
};

class MaxIterations : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration. `field()` is the JSON path of the offending entry.
class SchemaError : public Error {
 public:
  SchemaError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Well-typed configuration value outside its admissible range.
class RangeError : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

}  // namespace uavflow

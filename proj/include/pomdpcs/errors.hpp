#pragma once

#include <stdexcept>
#include <string>

namespace pomdpcs {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model or input data violates a documented invariant.
class InvalidModel : public Error {
 public:
  using Error::Error;
};

/// An observation has (numerically) zero probability under the model.
class ZeroLikelihood : public Error {
 public:
  using Error::Error;
};

class ResourceLimit : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class PreconditionFailed : public Error {
 public:
  using Error::Error;
};

class PostconditionFailed : public Error {
 public:
  using Error::Error;
};

class NegativeEigenvalue : public Error {
 public:
  using Error::Error;
};

/// A solved policy lacks a structure that theory guarantees; usually a
/// solver misconfiguration (grid too coarse, tolerance too loose).
class StructureViolation : public Error {
 public:
  using Error::Error;
};

class HorizonUnbounded : public Error {
 public:
  using Error::Error;
};

}  // namespace pomdpcs

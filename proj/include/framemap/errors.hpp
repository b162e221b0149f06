#pragma once

#include <stdexcept>
#include <string>

namespace framemap {

/// Base class of all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The request itself is malformed (bad arguments, preconditions on
/// parameters). CLI maps these to exit code 2.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// The request is well-formed but this particular point is not admissible
/// (singular centre, stratum hit, depth cap, ...).
class EvalError : public Error {
public:
  using Error::Error;
};

/// A numeric contract asserted by a check failed. CLI maps these to exit
/// code 3 so CI can distinguish "the math is wrong" from usage errors.
class ContractViolation : public Error {
public:
  using Error::Error;
};

class ZeroPoint : public EvalError {
public:
  ZeroPoint() : EvalError("ZeroPoint: map undefined at the singular centre x = 0") {}
};

class NotOnFace : public EvalError {
public:
  explicit NotOnFace(const std::string& what) : EvalError("NotOnFace: " + what) {}
};

class MinDimension : public ValidationError {
public:
  explicit MinDimension(const std::string& what) : ValidationError("MinDimension: " + what) {}
};

class OutOfDomain : public EvalError {
public:
  explicit OutOfDomain(const std::string& what) : EvalError("OutOfDomain: " + what) {}
};

class DepthExceeded : public EvalError {
public:
  explicit DepthExceeded(const std::string& what) : EvalError("DepthExceeded: " + what) {}
};

class OnStratum : public EvalError {
public:
  explicit OnStratum(const std::string& what) : EvalError("OnStratum: " + what) {}
};

class StencilCrossesStratum : public EvalError {
public:
  explicit StencilCrossesStratum(const std::string& what)
      : EvalError("StencilCrossesStratum: " + what) {}
};

class SingularSet : public EvalError {
public:
  explicit SingularSet(const std::string& what) : EvalError("SingularSet: " + what) {}
};

class ExponentOutOfRange : public ValidationError {
public:
  explicit ExponentOutOfRange(const std::string& what)
      : ValidationError("ExponentOutOfRange: " + what) {}
};

class IntegrandUnsupported : public ValidationError {
public:
  explicit IntegrandUnsupported(const std::string& what)
      : ValidationError("IntegrandUnsupported: " + what) {}
};

class CountOverflow : public ValidationError {
public:
  explicit CountOverflow(const std::string& what) : ValidationError("CountOverflow: " + what) {}
};

/// Too many consecutive stratum hits while resampling; indicates a geometry
/// bug rather than bad luck.
class RetryExhausted : public EvalError {
public:
  explicit RetryExhausted(const std::string& what) : EvalError("RetryExhausted: " + what) {}
};

}  // namespace framemap

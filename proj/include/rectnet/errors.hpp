#pragma once

#include <stdexcept>
#include <string>

namespace rectnet {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shapes of operands do not line up (matrix/vector arithmetic, eval inputs).
struct DimensionMismatch : Error {
  using Error::Error;
};

// A stack or net violates its structural invariants.
struct InvalidNet : Error {
  using Error::Error;
};

// A max-rectifier net must carry at least one head.
struct EmptyHeads : Error {
  using Error::Error;
};

// Width lists must be nonempty with strictly positive entries.
struct InvalidWidths : Error {
  using Error::Error;
};

// Subset expansion requires nonnegative combination coefficients.
struct NegativeCoefficient : Error {
  using Error::Error;
};

// An operation was handed a net of the wrong family.
struct FamilyMismatch : Error {
  using Error::Error;
};
struct NotPlain : FamilyMismatch {
  using FamilyMismatch::FamilyMismatch;
};
struct NotFullSkip : FamilyMismatch {
  using FamilyMismatch::FamilyMismatch;
};
struct NotResidual : FamilyMismatch {
  using FamilyMismatch::FamilyMismatch;
};

// Depth reduction needs at least two hidden layers to remove one.
struct DepthTooSmall : Error {
  using Error::Error;
};

// Line probes need a direction with at least one nonzero entry.
struct ZeroDirection : Error {
  using Error::Error;
};

// A transformation would produce more than 2^cap heads.
struct CapExceeded : Error {
  unsigned long long exponent;  // base-2 log of the projected head count
  unsigned long long cap;
  CapExceeded(unsigned long long exponent_, unsigned long long cap_,
              const std::string& what_)
      : Error(what_), exponent(exponent_), cap(cap_) {}
};

// Malformed input file: bad JSON, unknown/missing field, wrong type.
struct ParseError : Error {
  using Error::Error;
};

}  // namespace rectnet

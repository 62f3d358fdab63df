#pragma once

#include <stdexcept>
#include <string>

namespace bregfw {

// Base type for all library errors; everything thrown on purpose derives from it.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Point outside the domain of a kernel or objective (negative coordinate under
// entropy, Ax with a nonpositive component under the KL objective, ...).
struct DomainViolation : Error {
  using Error::Error;
  explicit DomainViolation(const std::string& msg) : Error(msg) {}
};

// Feasible region not contained in the kernel/objective domain at problem setup.
struct DomainMismatch : Error {
  explicit DomainMismatch(const std::string& msg) : Error(msg) {}
};

struct ShapeMismatch : Error {
  explicit ShapeMismatch(const std::string& msg) : Error(msg) {}
};

struct InvalidConstant : Error {
  explicit InvalidConstant(const std::string& msg) : Error(msg) {}
};

// Adaptive step search exhausted its inner-iteration cap without acceptance.
struct LineSearchDiverged : Error {
  explicit LineSearchDiverged(const std::string& msg) : Error(msg) {}
};

// Solver requires a specific kernel/region pairing (mirror descent wants
// entropy on the simplex) and got something else.
struct KernelMismatch : Error {
  explicit KernelMismatch(const std::string& msg) : Error(msg) {}
};

struct UnsupportedRegion : Error {
  explicit UnsupportedRegion(const std::string& msg) : Error(msg) {}
};

// Vertex enumeration requested for a region without finitely many vertices.
struct Unsupported : Error {
  explicit Unsupported(const std::string& msg) : Error(msg) {}
};

// Vertex enumeration would exceed the documented cap.
struct TooLarge : Error {
  explicit TooLarge(const std::string& msg) : Error(msg) {}
};

// No grid value passed the sampled scaling-exponent check.
struct NoValidNu : Error {
  explicit NoValidNu(const std::string& msg) : Error(msg) {}
};

// Rate fit asked for on a series with too few usable points.
struct DegenerateSeries : Error {
  explicit DegenerateSeries(const std::string& msg) : Error(msg) {}
};

struct UnknownKind : Error {
  explicit UnknownKind(const std::string& msg) : Error(msg) {}
};

struct InfeasibleStart : Error {
  explicit InfeasibleStart(const std::string& msg) : Error(msg) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace bregfw

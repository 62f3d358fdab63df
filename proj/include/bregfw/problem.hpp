#pragma once

#include <optional>

#include "bregfw/kernels.hpp"
#include "bregfw/objectives.hpp"
#include "bregfw/regions.hpp"

namespace bregfw {

// Analytic constants attached to a problem when known. All optional; each
// consumer fails fast when a constant it needs is absent.
struct TheoryConstants {
  std::optional<double> smad_L;                // relative-smoothness constant
  std::optional<double> nu;                    // kernel scaling exponent, (0, 1]
  std::optional<double> growth_mu;             // quadratic/HEB growth modulus
  std::optional<double> growth_q;              // HEB exponent, >= 1
  std::optional<double> weak_rho;              // weak-convexity modulus
  std::optional<double> interior_radius;       // r with B(x*, r) inside the region
  std::optional<double> pyramidal_width;       // polytope geometric constant
  std::optional<double> f_star;

  void validate() const;  // throws InvalidConstant
};

struct ProblemInstance {
  ObjectivePtr objective;
  Kernel kernel;
  Region region;
  TheoryConstants constants;
};

// Validates shapes, constants, and that the region sits inside the kernel and
// objective domains: phi must be finite at sampled vertices/boundary points,
// and phi, grad phi, f, grad f must all be finite at sampled interior points.
// Throws DomainMismatch / ShapeMismatch / InvalidConstant.
ProblemInstance make_problem(ObjectivePtr objective, Kernel kernel, Region region,
                             TheoryConstants constants = {});

}  // namespace bregfw

#include "bregfw/problem.hpp"

#include <cmath>
#include <string>

#include "bregfw/rng.hpp"

namespace bregfw {

void TheoryConstants::validate() const {
  if (smad_L && !(*smad_L > 0.0)) throw InvalidConstant("smad_L must be positive");
  if (nu && !(*nu > 0.0 && *nu <= 1.0)) throw InvalidConstant("nu must lie in (0, 1]");
  if (growth_mu && !(*growth_mu > 0.0)) throw InvalidConstant("growth_mu must be positive");
  if (growth_q && !(*growth_q >= 1.0)) throw InvalidConstant("growth_q must be at least 1");
  if (weak_rho && !(*weak_rho > 0.0)) throw InvalidConstant("weak_rho must be positive");
  if (interior_radius && !(*interior_radius > 0.0))
    throw InvalidConstant("interior_radius must be positive");
  if (pyramidal_width && !(*pyramidal_width > 0.0))
    throw InvalidConstant("pyramidal_width must be positive");
}

ProblemInstance make_problem(ObjectivePtr objective, Kernel kernel, Region region,
                             TheoryConstants constants) {
  if (!objective) throw InvalidConstant("make_problem: null objective");
  constants.validate();

  if (objective->point_shape() != region.point_shape())
    throw ShapeMismatch("make_problem: objective expects shape " +
                        shape_string(objective->point_shape()) + " but region points have " +
                        shape_string(region.point_shape()));

  // The kernel must cover the feasible set: finite value everywhere we can
  // land (vertices and near-boundary points), and a usable gradient on the
  // interior, where line searches and divergence evaluations live.
  Rng rng(20240229);
  std::vector<DensePoint> closure_probes;
  if (region.is_polytope()) {
    try {
      if (region.vertex_count() <= 64)
        for (auto& v : region.enumerate_vertices()) closure_probes.push_back(std::move(v));
    } catch (const TooLarge&) {
      // vertex set too big to even count; boundary samples below still probe it
    }
  }
  for (int i = 0; i < 8; ++i) closure_probes.push_back(region.sample_boundaryish(rng));

  for (const DensePoint& p : closure_probes) {
    if (!kernel.value_defined(p))
      throw DomainMismatch("make_problem: kernel value undefined on the feasible set");
    if (!std::isfinite(kernel.value(p)))
      throw DomainMismatch("make_problem: kernel value infinite on the feasible set");
  }

  for (int i = 0; i < 8; ++i) {
    const DensePoint p = region.sample_interior(rng);
    if (!kernel.interior(p))
      throw DomainMismatch("make_problem: kernel gradient undefined on interior samples");
    if (!kernel.gradient(p).finite())
      throw DomainMismatch("make_problem: kernel gradient not finite on interior samples");
  }

  return ProblemInstance{std::move(objective), std::move(kernel), std::move(region),
                         std::move(constants)};
}

}  // namespace bregfw

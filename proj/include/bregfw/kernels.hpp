#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "bregfw/point.hpp"

namespace bregfw {

class Region;

enum class KernelId {
  Euclidean,
  Entropy,
  Burg,
  Quartic,
  QuarticScaled,
  ObjectiveAsKernel,
};

enum class KernelDomain {
  AllReals,
  NonnegativeOrthant,  // value defined on the boundary, gradient only inside
  PositiveOrthant,     // value +inf on the boundary
};

std::string kernel_name(KernelId id);

// Distance-generating function phi. value() returns +inf for
// boundary-forbidden points (Burg at a zero coordinate) and throws
// DomainViolation for points outside the closed domain; gradient() throws
// DomainViolation outside the domain interior.
class Kernel {
 public:
  static Kernel euclidean();
  static Kernel entropy();
  static Kernel burg();
  static Kernel quartic();
  // phi(x) = (3/4)||x||^4 + (c/2)||x||^2
  static Kernel quartic_scaled(double c);
  static Kernel objective_as_kernel(std::function<double(const DensePoint&)> value,
                                    std::function<DensePoint(const DensePoint&)> gradient);

  KernelId id() const { return id_; }
  KernelDomain domain() const { return domain_; }
  double scale_param() const { return c_; }

  double value(const DensePoint& x) const;
  DensePoint gradient(const DensePoint& x) const;
  // True when value(x) is finite without throwing.
  bool value_defined(const DensePoint& x) const;
  // True when gradient(x) is defined (x in the domain interior).
  bool interior(const DensePoint& x) const;

  // D_phi(x, y) = phi(x) - phi(y) - <grad phi(y), x - y>. Tiny negatives from
  // cancellation (>= -1e-12 * (1 + |phi(x)|)) clamp to 0. The Euclidean kernel
  // uses the closed form 0.5 * ||x - y||^2 directly.
  double divergence(const DensePoint& x, const DensePoint& y) const;

 private:
  Kernel(KernelId id, KernelDomain domain) : id_(id), domain_(domain) {}

  KernelId id_;
  KernelDomain domain_;
  double c_ = 1.0;  // QuarticScaled weight
  std::function<double(const DensePoint&)> obj_value_;
  std::function<DensePoint(const DensePoint&)> obj_grad_;
};

struct NuEstimate {
  double nu_hat = 0.0;
  // Binding sample: the (x, y, gamma) triple with the smallest implied
  // exponent at the accepted grid value.
  DensePoint x, y;
  double gamma = 0.0;
  double implied_nu = 0.0;
};

inline constexpr double kNuGrid[] = {1.0,  0.95, 0.9,  0.85, 0.8,  0.75, 0.7,
                                     0.65, 0.6,  0.55, 0.5,  0.45, 0.4,  0.35,
                                     0.3,  0.25, 0.2,  0.15, 0.1,  0.05};

// Largest grid value nu such that D_phi((1-g)x + g y, x) <= g^(1+nu) D_phi(y, x)
// + 1e-12 over all sampled interior pairs and gammas. Sampled estimate, not a
// certificate. Throws NoValidNu when even the smallest grid value fails.
NuEstimate estimate_nu(const Kernel& kernel, const Region& region,
                       std::size_t n_pairs, std::span<const double> gamma_grid,
                       std::uint64_t seed);

}  // namespace bregfw

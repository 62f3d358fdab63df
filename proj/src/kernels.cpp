#include "bregfw/kernels.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "bregfw/regions.hpp"

namespace bregfw {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string kernel_name(KernelId id) {
  switch (id) {
    case KernelId::Euclidean: return "euclidean";
    case KernelId::Entropy: return "entropy";
    case KernelId::Burg: return "burg";
    case KernelId::Quartic: return "quartic";
    case KernelId::QuarticScaled: return "quartic_scaled";
    case KernelId::ObjectiveAsKernel: return "objective";
  }
  return "?";
}

Kernel Kernel::euclidean() { return Kernel(KernelId::Euclidean, KernelDomain::AllReals); }
Kernel Kernel::entropy() { return Kernel(KernelId::Entropy, KernelDomain::NonnegativeOrthant); }
Kernel Kernel::burg() { return Kernel(KernelId::Burg, KernelDomain::PositiveOrthant); }
Kernel Kernel::quartic() { return Kernel(KernelId::Quartic, KernelDomain::AllReals); }

Kernel Kernel::quartic_scaled(double c) {
  if (!(c > 0.0)) throw InvalidConstant("quartic_scaled: weight must be positive");
  Kernel k(KernelId::QuarticScaled, KernelDomain::AllReals);
  k.c_ = c;
  return k;
}

Kernel Kernel::objective_as_kernel(std::function<double(const DensePoint&)> value,
                                   std::function<DensePoint(const DensePoint&)> gradient) {
  Kernel k(KernelId::ObjectiveAsKernel, KernelDomain::AllReals);
  k.obj_value_ = std::move(value);
  k.obj_grad_ = std::move(gradient);
  return k;
}

double Kernel::value(const DensePoint& x) const {
  switch (id_) {
    case KernelId::Euclidean:
      return 0.5 * nrm2_sq(x);
    case KernelId::Entropy: {
      double s = 0.0;
      for (double v : x.data) {
        if (v < 0.0) throw DomainViolation("entropy kernel: negative coordinate");
        if (v > 0.0) s += v * std::log(v);  // 0 log 0 := 0
      }
      return s;
    }
    case KernelId::Burg: {
      double s = 0.0;
      for (double v : x.data) {
        if (v < 0.0) throw DomainViolation("burg kernel: negative coordinate");
        if (v == 0.0) return kInf;  // boundary-forbidden, signaled not thrown
        s -= std::log(v);
      }
      return s;
    }
    case KernelId::Quartic: {
      const double n2 = nrm2_sq(x);
      return 0.25 * n2 * n2 + 0.5 * n2;
    }
    case KernelId::QuarticScaled: {
      const double n2 = nrm2_sq(x);
      return 0.75 * n2 * n2 + 0.5 * c_ * n2;
    }
    case KernelId::ObjectiveAsKernel:
      return obj_value_(x);
  }
  throw Error("kernel value: unreachable");
}

DensePoint Kernel::gradient(const DensePoint& x) const {
  switch (id_) {
    case KernelId::Euclidean:
      return x;
    case KernelId::Entropy: {
      DensePoint g = x;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0))
          throw DomainViolation("entropy kernel: gradient needs positive coordinates");
        g.data[i] = 1.0 + std::log(x[i]);
      }
      return g;
    }
    case KernelId::Burg: {
      DensePoint g = x;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0))
          throw DomainViolation("burg kernel: gradient needs positive coordinates");
        g.data[i] = -1.0 / x[i];
      }
      return g;
    }
    case KernelId::Quartic: {
      DensePoint g = x;
      scale(nrm2_sq(x) + 1.0, g);
      return g;
    }
    case KernelId::QuarticScaled: {
      DensePoint g = x;
      scale(3.0 * nrm2_sq(x) + c_, g);
      return g;
    }
    case KernelId::ObjectiveAsKernel:
      return obj_grad_(x);
  }
  throw Error("kernel gradient: unreachable");
}

bool Kernel::value_defined(const DensePoint& x) const {
  if (!x.finite()) return false;
  switch (domain_) {
    case KernelDomain::AllReals:
      return true;
    case KernelDomain::NonnegativeOrthant:
      for (double v : x.data)
        if (v < 0.0) return false;
      return true;
    case KernelDomain::PositiveOrthant:
      for (double v : x.data)
        if (!(v > 0.0)) return false;
      return true;
  }
  return false;
}

bool Kernel::interior(const DensePoint& x) const {
  if (!x.finite()) return false;
  if (domain_ == KernelDomain::AllReals) return true;
  for (double v : x.data)
    if (!(v > 0.0)) return false;
  return true;
}

double Kernel::divergence(const DensePoint& x, const DensePoint& y) const {
  x.require_same_shape(y, "divergence");
  if (id_ == KernelId::Euclidean) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - y[i];
      s += d * d;
    }
    return 0.5 * s;
  }
  const double phix = value(x);
  if (phix == kInf) return kInf;
  const DensePoint gy = gradient(y);
  double d = phix - value(y);
  for (std::size_t i = 0; i < x.size(); ++i) d -= gy[i] * (x[i] - y[i]);
  if (d < 0.0 && d >= -1e-12 * (1.0 + std::fabs(phix))) d = 0.0;
  return d;
}

NuEstimate estimate_nu(const Kernel& kernel, const Region& region,
                       std::size_t n_pairs, std::span<const double> gamma_grid,
                       std::uint64_t seed) {
  Rng rng(seed);
  struct Sample {
    DensePoint x, y;
    double gamma;
    double lhs, d_yx;
  };
  std::vector<Sample> samples;
  samples.reserve(n_pairs * gamma_grid.size());
  for (std::size_t i = 0; i < n_pairs; ++i) {
    DensePoint x = region.sample_interior(rng, 0.1);
    DensePoint y = region.sample_interior(rng, 0.1);
    const double d_yx = kernel.divergence(y, x);
    if (!(d_yx > 0.0) || !std::isfinite(d_yx)) continue;
    for (double g : gamma_grid) {
      if (!(g > 0.0) || !(g < 1.0)) continue;
      const DensePoint mixed = mix(x, y, g);
      const double lhs = kernel.divergence(mixed, x);
      samples.push_back({x, y, g, lhs, d_yx});
    }
  }
  if (samples.empty()) throw NoValidNu("estimate_nu: no usable sample pairs");

  auto implied_nu = [](const Sample& s) {
    // Largest nu with lhs <= gamma^(1+nu) d_yx + 1e-12; +inf when slack covers it.
    const double adj = s.lhs - 1e-12;
    if (adj <= 0.0) return kInf;
    return std::log(adj / s.d_yx) / std::log(s.gamma) - 1.0;
  };

  for (double nu : kNuGrid) {
    bool all_ok = true;
    for (const Sample& s : samples) {
      if (s.lhs > std::pow(s.gamma, 1.0 + nu) * s.d_yx + 1e-12) {
        all_ok = false;
        break;
      }
    }
    if (!all_ok) continue;
    const Sample* binding = &samples.front();
    double worst = kInf;
    for (const Sample& s : samples) {
      const double inu = implied_nu(s);
      if (inu < worst) {
        worst = inu;
        binding = &s;
      }
    }
    NuEstimate est;
    est.nu_hat = nu;
    est.x = binding->x;
    est.y = binding->y;
    est.gamma = binding->gamma;
    est.implied_nu = worst;
    return est;
  }
  std::ostringstream os;
  os << "estimate_nu: no grid exponent passed over " << samples.size() << " samples";
  throw NoValidNu(os.str());
}

}  // namespace bregfw

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bregfw/kernels.hpp"
#include "bregfw/point.hpp"
#include "bregfw/rng.hpp"

namespace bregfw {

enum class RegionKind {
  SimplexLeqOne,    // {x >= 0, sum x <= 1}
  L2Ball,           // {||x||^2 <= b_max}
  Box,              // {lower <= x <= upper} componentwise
  KSparsePolytope,  // {||x||_1 <= K, ||x||_inf <= 1}
  NuclearNormBall,  // matrices with nuclear norm <= xi
  ExplicitPolytope, // convex hull of a stored vertex list
};

std::string region_name(RegionKind kind);

// Vertex enumeration refuses above this many vertices.
inline constexpr std::size_t kVertexEnumerationCap = 1u << 20;

class Region {
 public:
  static Region simplex(std::size_t n);
  static Region l2_ball(std::size_t n, double b_max);
  static Region box(std::vector<double> lower, std::vector<double> upper);
  static Region box(std::size_t n, double lo, double hi);
  static Region k_sparse(std::size_t n, std::size_t k);
  static Region nuclear_ball(std::size_t rows, std::size_t cols, double xi);
  static Region explicit_polytope(std::vector<DensePoint> vertices);

  RegionKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  std::vector<std::size_t> point_shape() const;
  bool is_polytope() const;
  double b_max() const { return b_max_; }
  double xi() const { return xi_; }
  std::size_t sparsity() const { return k_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }

  // argmin over the region of <direction, v>, always an extreme point.
  // Ties break toward the lowest coordinate/vertex index. The output is
  // deterministic and invariant under positive scaling of the direction.
  DensePoint lmo(const DensePoint& direction) const;

  bool contains(const DensePoint& x, double tol = 1e-9) const;

  // Exact vertex list, no duplicates. Throws Unsupported for the ball kinds
  // and TooLarge above kVertexEnumerationCap.
  std::vector<DensePoint> enumerate_vertices() const;
  std::size_t vertex_count() const;  // same error behavior

  // Sampled sup of D_phi(x, y): vertices when enumerable plus boundary and
  // interior samples; y is restricted to kernel-interior points. A sampled
  // lower estimate of the true squared diameter.
  double bregman_diameter_sq(const Kernel& kernel, std::size_t n_samples,
                             std::uint64_t seed) const;

  // Random strictly feasible point; pull > 0 mixes toward a canonical interior
  // anchor, keeping samples away from the boundary.
  DensePoint sample_interior(Rng& rng, double pull = 0.1) const;
  DensePoint sample_boundaryish(Rng& rng) const;
  DensePoint center() const;

  // Euclidean projection (ball: radial scaling; box: clamp; simplex: nonneg
  // clamp, then sorted threshold when the clamped sum exceeds 1). Throws
  // UnsupportedRegion for the other kinds.
  DensePoint project(const DensePoint& y) const;

 private:
  explicit Region(RegionKind kind) : kind_(kind) {}

  RegionKind kind_;
  std::size_t dim_ = 0;
  std::size_t rows_ = 0, cols_ = 0;  // nuclear ball
  double b_max_ = 1.0;
  double xi_ = 1.0;
  std::size_t k_ = 1;
  std::vector<double> lower_, upper_;
  std::vector<DensePoint> vertices_;  // explicit polytope
};

}  // namespace bregfw

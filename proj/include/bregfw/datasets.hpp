#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "bregfw/objectives.hpp"
#include "bregfw/regions.hpp"

namespace bregfw {

// Synthetic instance recipes. Region geometry stays in the experiment config;
// generators that pin a region parameter from data (nuclear radius) report it
// through region_hint.
enum class RecipeKind {
  Quadratic,       // diag spectrum on [lambda_min, lambda_max], interior optimum
  LpLoss,          // unit-norm rows, planted x* at 0.8 * radius, optional noise
  PhaseRetrieval,  // unit-norm measurement rows, planted nonnegative x*
  KLInverse,       // column-normalized |gaussian| mixing matrix, planted x* in the simplex
  LowRank,         // M = X* X*^T from unit-norm columns
  NMF,             // V = W* H*, W* unit-norm columns, H* columns flat-Dirichlet
};

RecipeKind recipe_kind_from_string(const std::string& name);  // UnknownKind

struct RecipeSpec {
  RecipeKind kind = RecipeKind::Quadratic;
  std::size_t m = 0, n = 0, r = 0;
  double p = 1.1;            // LpLoss exponent
  double noise = 0.0;        // LpLoss: additive sigma on b
  double radius = 1.0;       // LpLoss ball radius (planted norm = 0.8 * radius)
  bool normalize_xstar = true;  // PhaseRetrieval: scale x* to sum 1
  double lambda_min = 1.0, lambda_max = 2.0;  // Quadratic spectrum
  std::optional<DensePoint> quadratic_center;  // Quadratic minimizer
};

struct GeneratedDataset {
  ObjectivePtr objective;
  std::optional<double> f_star;
  std::string fstar_source;  // "generator" when f_star is set
  std::optional<DensePoint> planted;  // x* when one exists
  std::optional<double> nuclear_radius_hint;  // LowRank: 10 * lambda_max(M)
  std::map<std::string, double> meta;
};

GeneratedDataset generate_dataset(const RecipeSpec& spec, std::uint64_t seed);

// Plain-text matrices: one row per line, whitespace-separated decimals.
DensePoint load_matrix_text(const std::string& path);
void save_matrix_text(const DensePoint& m, const std::string& path);

// Binary matrices: magic "BFWM", uint64 rows, uint64 cols, row-major doubles,
// native endianness.
DensePoint load_matrix_binary(const std::string& path);
void save_matrix_binary(const DensePoint& m, const std::string& path);

}  // namespace bregfw

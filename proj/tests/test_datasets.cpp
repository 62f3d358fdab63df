#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include "bregfw/datasets.hpp"
#include "bregfw/errors.hpp"

using namespace bregfw;

namespace {

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& name)
      : path(std::filesystem::temp_directory_path() / name) {}
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
  std::string str() const { return path.string(); }
};

double sum(const DensePoint& x) {
  double s = 0.0;
  for (double v : x.data) s += v;
  return s;
}

}  // namespace

TEST_CASE("recipe names") {
  CHECK(recipe_kind_from_string("quadratic") == RecipeKind::Quadratic);
  CHECK(recipe_kind_from_string("lp_loss") == RecipeKind::LpLoss);
  CHECK(recipe_kind_from_string("phase_retrieval") == RecipeKind::PhaseRetrieval);
  CHECK(recipe_kind_from_string("kl_inverse") == RecipeKind::KLInverse);
  CHECK(recipe_kind_from_string("low_rank") == RecipeKind::LowRank);
  CHECK(recipe_kind_from_string("nmf") == RecipeKind::NMF);
  CHECK_THROWS_AS(recipe_kind_from_string("ridge"), UnknownKind);
}

TEST_CASE("quadratic recipe plants an interior minimizer") {
  RecipeSpec spec;
  spec.kind = RecipeKind::Quadratic;
  spec.n = 4;
  spec.lambda_min = 1.0;
  spec.lambda_max = 2.0;
  auto ds = generate_dataset(spec, 3);
  REQUIRE(ds.planted.has_value());
  CHECK(bit_equal(*ds.planted, DensePoint::vector(4, 0.5)));
  REQUIRE(ds.f_star.has_value());
  CHECK(ds.fstar_source == "generator");
  CHECK(*ds.f_star == ds.objective->value(*ds.planted));
  // c = -Q x* entrywise, so the gradient cancels exactly at the center.
  auto g = ds.objective->gradient(*ds.planted);
  for (double v : g.data) CHECK(v == 0.0);
  // Diagonal spectrum stays inside the requested band.
  const double L = ds.objective->smad_constant().value();
  CHECK(L >= 1.0);
  CHECK(L <= 2.0);

  spec.quadratic_center = DensePoint::from({1.0, 2.0, 3.0, 4.0});
  auto shifted = generate_dataset(spec, 3);
  CHECK(bit_equal(*shifted.planted, *spec.quadratic_center));
  auto g2 = shifted.objective->gradient(*shifted.planted);
  for (double v : g2.data) CHECK(v == 0.0);

  spec.quadratic_center = DensePoint::from({1.0, 2.0});
  CHECK_THROWS_AS(generate_dataset(spec, 3), ShapeMismatch);
  spec.quadratic_center.reset();
  spec.lambda_min = 0.0;
  CHECK_THROWS_AS(generate_dataset(spec, 3), InvalidConstant);
  spec.lambda_min = 3.0;  // exceeds lambda_max
  CHECK_THROWS_AS(generate_dataset(spec, 3), InvalidConstant);
}

TEST_CASE("lp loss recipe fits the planted point exactly without noise") {
  RecipeSpec spec;
  spec.kind = RecipeKind::LpLoss;
  spec.m = 6;
  spec.n = 4;
  spec.p = 1.5;
  spec.radius = 2.0;
  auto ds = generate_dataset(spec, 11);
  REQUIRE(ds.planted.has_value());
  CHECK(std::sqrt(nrm2_sq(*ds.planted)) == doctest::Approx(1.6).epsilon(1e-12));
  CHECK(ds.objective->value(*ds.planted) <= 1e-18);
  REQUIRE(ds.f_star.has_value());
  CHECK(*ds.f_star == 0.0);
  CHECK(ds.fstar_source == "generator");
  CHECK(ds.meta.at("p") == 1.5);

  spec.noise = 0.05;
  auto noisy = generate_dataset(spec, 11);
  CHECK_FALSE(noisy.f_star.has_value());
  CHECK(noisy.objective->value(*noisy.planted) > 0.0);

  spec.noise = -1.0;
  CHECK_THROWS_AS(generate_dataset(spec, 11), InvalidConstant);
  spec.noise = 0.0;
  spec.p = 1.0;
  CHECK_THROWS_AS(generate_dataset(spec, 11), InvalidConstant);
  spec.p = 1.5;
  spec.radius = 0.0;
  CHECK_THROWS_AS(generate_dataset(spec, 11), InvalidConstant);
  spec.radius = 1.0;
  spec.m = 0;
  CHECK_THROWS_AS(generate_dataset(spec, 11), InvalidConstant);
}

TEST_CASE("phase retrieval recipe plants a nonnegative signal") {
  RecipeSpec spec;
  spec.kind = RecipeKind::PhaseRetrieval;
  spec.m = 5;
  spec.n = 3;
  auto ds = generate_dataset(spec, 5);
  REQUIRE(ds.planted.has_value());
  CHECK(sum(*ds.planted) == doctest::Approx(1.0).epsilon(1e-12));
  for (double v : ds.planted->data) CHECK(v >= 0.0);
  CHECK(ds.objective->value(*ds.planted) <= 1e-20);
  CHECK(*ds.f_star == 0.0);

  spec.normalize_xstar = false;
  auto raw = generate_dataset(spec, 5);
  for (double v : raw.planted->data) {
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
  CHECK(raw.objective->value(*raw.planted) <= 1e-20);
}

TEST_CASE("kl inverse recipe plants a strict simplex interior point") {
  RecipeSpec spec;
  spec.kind = RecipeKind::KLInverse;
  spec.m = 5;
  spec.n = 8;
  auto ds = generate_dataset(spec, 7);
  REQUIRE(ds.planted.has_value());
  CHECK(sum(*ds.planted) == doctest::Approx(0.8).epsilon(1e-12));
  for (double v : ds.planted->data) CHECK(v > 0.0);
  CHECK(Region::simplex(8).contains(*ds.planted));
  // Mixing columns are normalized to sum one, and the smoothness constant
  // relative to entropy is exactly the largest column sum.
  CHECK(ds.objective->smad_constant().value() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ds.objective->value(*ds.planted) <= 1e-12);
  CHECK(*ds.f_star == 0.0);
}

TEST_CASE("low rank recipe reports a nuclear radius that covers the plant") {
  RecipeSpec spec;
  spec.kind = RecipeKind::LowRank;
  spec.n = 4;
  spec.r = 2;
  auto ds = generate_dataset(spec, 13);
  REQUIRE(ds.planted.has_value());
  CHECK(ds.planted->shape == std::vector<std::size_t>{4, 2});
  CHECK(ds.objective->value(*ds.planted) <= 1e-20);
  CHECK(*ds.f_star == 0.0);
  REQUIRE(ds.nuclear_radius_hint.has_value());
  // Unit-norm factor columns bracket the top singular value: 1 <= s1^2 <= r.
  CHECK(*ds.nuclear_radius_hint >= 10.0 - 1e-9);
  CHECK(*ds.nuclear_radius_hint <= 20.0 + 1e-9);

  spec.r = 0;
  CHECK_THROWS_AS(generate_dataset(spec, 13), InvalidConstant);
}

TEST_CASE("nmf recipe plants stacked factors that reproduce the target") {
  RecipeSpec spec;
  spec.kind = RecipeKind::NMF;
  spec.m = 3;
  spec.n = 4;
  spec.r = 2;
  auto ds = generate_dataset(spec, 17);
  REQUIRE(ds.planted.has_value());
  CHECK(ds.planted->size() == 3 * 2 + 2 * 4);
  CHECK(ds.objective->value(*ds.planted) <= 1e-18);
  CHECK(*ds.f_star == 0.0);
  // Each target column is W h with unit-norm W columns and a simplex h,
  // so the Frobenius norm lands in (0, sqrt(n)].
  const double fnorm = ds.meta.at("v_fnorm");
  CHECK(fnorm > 0.0);
  CHECK(fnorm <= 2.0 + 1e-12);
}

TEST_CASE("generation is deterministic in the seed") {
  RecipeSpec spec;
  spec.kind = RecipeKind::LpLoss;
  spec.m = 4;
  spec.n = 3;
  auto a = generate_dataset(spec, 21);
  auto b = generate_dataset(spec, 21);
  CHECK(bit_equal(*a.planted, *b.planted));
  const DensePoint probe = DensePoint::from({0.1, -0.2, 0.3});
  CHECK(a.objective->value(probe) == b.objective->value(probe));
  auto c = generate_dataset(spec, 22);
  CHECK_FALSE(bit_equal(*a.planted, *c.planted));
}

TEST_CASE("text matrices round-trip bit-exactly") {
  DensePoint m = DensePoint::matrix(2, 3, 0.0);
  m.data = {1.0, -0.1, 1e-300, 3.14159265358979312, -2.5, 0.0};
  TempFile f("bregfw_ds_roundtrip.txt");
  save_matrix_text(m, f.str());
  DensePoint back = load_matrix_text(f.str());
  CHECK(back.shape == m.shape);
  CHECK(bit_equal(back, m));
}

TEST_CASE("text matrix loader diagnostics") {
  TempFile f("bregfw_ds_bad.txt");
  {
    std::ofstream out(f.str());
    out << "1 2 3\n\n4 5 6\n";
  }
  DensePoint ok = load_matrix_text(f.str());  // blank line skipped
  CHECK(ok.rows() == 2);
  CHECK(ok.cols() == 3);

  {
    std::ofstream out(f.str());
    out << "1 2 3\n4 5\n";
  }
  CHECK_THROWS_WITH_AS(load_matrix_text(f.str()),
                       doctest::Contains("line 2"), IoError);

  {
    std::ofstream out(f.str());
    out << "1 banana 3\n";
  }
  CHECK_THROWS_AS(load_matrix_text(f.str()), IoError);

  {
    std::ofstream out(f.str());
    out << "\n\n";
  }
  CHECK_THROWS_AS(load_matrix_text(f.str()), IoError);

  CHECK_THROWS_AS(load_matrix_text("/nonexistent/bregfw_nope.txt"), IoError);
}

TEST_CASE("binary matrices round-trip and reject corrupt headers") {
  DensePoint m = DensePoint::matrix(3, 2, 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) m.data[i] = std::sqrt(2.0) * (i + 1);
  TempFile f("bregfw_ds_roundtrip.bin");
  save_matrix_binary(m, f.str());
  DensePoint back = load_matrix_binary(f.str());
  CHECK(back.shape == m.shape);
  CHECK(bit_equal(back, m));

  {
    std::ofstream out(f.str(), std::ios::binary);
    out << "NOPE";
  }
  CHECK_THROWS_AS(load_matrix_binary(f.str()), IoError);

  {
    std::ofstream out(f.str(), std::ios::binary);
    out << "BFWM";
    const std::uint64_t rows = (1ull << 31), cols = 2;
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  }
  CHECK_THROWS_AS(load_matrix_binary(f.str()), TooLarge);

  {
    std::ofstream out(f.str(), std::ios::binary);
    out << "BFWM";
    const std::uint64_t rows = 2, cols = 2;
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    const double one = 1.0;
    out.write(reinterpret_cast<const char*>(&one), sizeof one);  // 1 of 4
  }
  CHECK_THROWS_AS(load_matrix_binary(f.str()), IoError);
}

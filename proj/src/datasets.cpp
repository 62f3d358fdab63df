#include "bregfw/datasets.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bregfw/linalg.hpp"
#include "bregfw/rng.hpp"
#include "bregfw/svd.hpp"
#include "bregfw/traces.hpp"

namespace bregfw {

RecipeKind recipe_kind_from_string(const std::string& name) {
  if (name == "quadratic") return RecipeKind::Quadratic;
  if (name == "lp_loss") return RecipeKind::LpLoss;
  if (name == "phase_retrieval") return RecipeKind::PhaseRetrieval;
  if (name == "kl_inverse") return RecipeKind::KLInverse;
  if (name == "low_rank") return RecipeKind::LowRank;
  if (name == "nmf") return RecipeKind::NMF;
  throw UnknownKind("unknown recipe: " + name);
}

namespace {

DensePoint normal_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  DensePoint a = DensePoint::matrix(rows, cols);
  for (double& v : a.data) v = rng.normal();
  return a;
}

void normalize_rows(DensePoint& a) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double n2 = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) n2 += a.at(i, j) * a.at(i, j);
    const double n = std::sqrt(n2);
    if (n > 0.0)
      for (std::size_t j = 0; j < a.cols(); ++j) a.at(i, j) /= n;
  }
}

void normalize_columns_to_unit_norm(DensePoint& a) {
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double n2 = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) n2 += a.at(i, j) * a.at(i, j);
    const double n = std::sqrt(n2);
    if (n > 0.0)
      for (std::size_t i = 0; i < a.rows(); ++i) a.at(i, j) /= n;
  }
}

std::vector<double> apply(const DensePoint& a, const DensePoint& x) {
  std::vector<double> y(a.rows());
  linalg::gemv(a.data, a.rows(), a.cols(), x.data, y);
  return y;
}

void require_dims(const RecipeSpec& spec, bool need_m, bool need_r) {
  if (spec.n == 0) throw InvalidConstant("recipe: n must be positive");
  if (need_m && spec.m == 0) throw InvalidConstant("recipe: m must be positive");
  if (need_r && spec.r == 0) throw InvalidConstant("recipe: r must be positive");
}

}  // namespace

GeneratedDataset generate_dataset(const RecipeSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  GeneratedDataset out;
  out.meta["seed"] = static_cast<double>(seed);
  out.meta["n"] = static_cast<double>(spec.n);

  switch (spec.kind) {
    case RecipeKind::Quadratic: {
      require_dims(spec, false, false);
      if (!(spec.lambda_min > 0.0) || !(spec.lambda_max >= spec.lambda_min))
        throw InvalidConstant("quadratic recipe: need 0 < lambda_min <= lambda_max");
      const std::size_t n = spec.n;
      DensePoint q = DensePoint::matrix(n, n);
      for (std::size_t j = 0; j < n; ++j)
        q.at(j, j) = spec.lambda_min + (spec.lambda_max - spec.lambda_min) * rng.uniform();
      DensePoint center = spec.quadratic_center
                              ? *spec.quadratic_center
                              : DensePoint::vector(n, 0.5);
      if (center.shape != std::vector<std::size_t>{n})
        throw ShapeMismatch("quadratic recipe: center has the wrong length");
      DensePoint c = DensePoint::vector(n);
      for (std::size_t j = 0; j < n; ++j) c[j] = -q.at(j, j) * center[j];
      out.objective = make_quadratic(std::move(q), std::move(c));
      out.f_star = out.objective->value(center);
      out.fstar_source = "generator";
      out.planted = std::move(center);
      out.meta["lambda_min"] = spec.lambda_min;
      out.meta["lambda_max"] = spec.lambda_max;
      return out;
    }

    case RecipeKind::LpLoss: {
      require_dims(spec, true, false);
      if (!(spec.p > 1.0)) throw InvalidConstant("lp_loss recipe: p must exceed 1");
      if (spec.noise < 0.0) throw InvalidConstant("lp_loss recipe: noise must be >= 0");
      if (!(spec.radius > 0.0)) throw InvalidConstant("lp_loss recipe: radius must be > 0");
      DensePoint a = normal_matrix(rng, spec.m, spec.n);
      normalize_rows(a);
      DensePoint xs = DensePoint::vector(spec.n);
      for (double& v : xs.data) v = rng.normal();
      const double norm = std::sqrt(nrm2_sq(xs));
      scale(0.8 * spec.radius / norm, xs);
      DensePoint b = DensePoint::from(apply(a, xs));
      if (spec.noise > 0.0)
        for (double& v : b.data) v += spec.noise * rng.normal();
      out.objective = make_lp_loss(std::move(a), std::move(b), spec.p);
      if (spec.noise == 0.0) {
        out.f_star = 0.0;
        out.fstar_source = "generator";
      }
      out.planted = std::move(xs);
      out.meta["m"] = static_cast<double>(spec.m);
      out.meta["p"] = spec.p;
      out.meta["noise"] = spec.noise;
      out.meta["radius"] = spec.radius;
      return out;
    }

    case RecipeKind::PhaseRetrieval: {
      require_dims(spec, true, false);
      DensePoint a = normal_matrix(rng, spec.m, spec.n);
      normalize_rows(a);
      DensePoint xs = DensePoint::vector(spec.n);
      for (double& v : xs.data) v = rng.uniform();
      if (spec.normalize_xstar) {
        double sum = 0.0;
        for (double v : xs.data) sum += v;
        if (sum > 0.0) scale(1.0 / sum, xs);
      }
      const std::vector<double> z = apply(a, xs);
      DensePoint b = DensePoint::vector(spec.m);
      for (std::size_t i = 0; i < spec.m; ++i) b[i] = z[i] * z[i];
      out.objective = make_phase_retrieval(std::move(a), std::move(b));
      out.f_star = 0.0;
      out.fstar_source = "generator";
      out.planted = std::move(xs);
      out.meta["m"] = static_cast<double>(spec.m);
      return out;
    }

    case RecipeKind::KLInverse: {
      require_dims(spec, true, false);
      DensePoint a = normal_matrix(rng, spec.m, spec.n);
      for (double& v : a.data) v = std::fabs(v);
      for (std::size_t j = 0; j < spec.n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < spec.m; ++i) s += a.at(i, j);
        if (s > 0.0)
          for (std::size_t i = 0; i < spec.m; ++i) a.at(i, j) /= s;
      }
      DensePoint xs = DensePoint::vector(spec.n);
      double sum = 0.0;
      for (double& v : xs.data) {
        v = rng.uniform();
        sum += v;
      }
      scale(0.8 / sum, xs);
      DensePoint b = DensePoint::from(apply(a, xs));
      out.objective = make_kl_inverse(std::move(a), std::move(b));
      out.f_star = 0.0;
      out.fstar_source = "generator";
      out.planted = std::move(xs);
      out.meta["m"] = static_cast<double>(spec.m);
      return out;
    }

    case RecipeKind::LowRank: {
      require_dims(spec, false, true);
      const std::size_t n = spec.n, r = spec.r;
      DensePoint xs = DensePoint::matrix(n, r);
      for (double& v : xs.data) v = rng.uniform();
      normalize_columns_to_unit_norm(xs);
      DensePoint m = DensePoint::matrix(n, n);
      std::vector<double> xt(r * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < r; ++j) xt[j * n + i] = xs.at(i, j);
      linalg::gemm(xs.data, n, r, xt, n, m.data);
      const TopSingularPair top = top_singular_pair_jacobi(xs.data, n, r);
      out.nuclear_radius_hint = 10.0 * top.sigma * top.sigma;
      out.objective = make_low_rank(std::move(m), r);
      out.f_star = 0.0;
      out.fstar_source = "generator";
      out.planted = std::move(xs);
      out.meta["r"] = static_cast<double>(r);
      return out;
    }

    case RecipeKind::NMF: {
      require_dims(spec, true, true);
      const std::size_t m = spec.m, n = spec.n, r = spec.r;
      DensePoint w = DensePoint::matrix(m, r);
      for (double& v : w.data) v = rng.uniform();
      normalize_columns_to_unit_norm(w);
      DensePoint h = DensePoint::matrix(r, n);
      for (std::size_t j = 0; j < n; ++j) {
        const std::vector<double> col = rng.simplex_uniform(r);
        for (std::size_t i = 0; i < r; ++i) h.at(i, j) = col[i];
      }
      DensePoint v = DensePoint::matrix(m, n);
      linalg::gemm(w.data, m, r, h.data, n, v.data);
      out.meta["v_fnorm"] = std::sqrt(linalg::nrm2_sq(v.data));
      DensePoint planted = DensePoint::vector(m * r + r * n);
      std::copy(w.data.begin(), w.data.end(), planted.data.begin());
      std::copy(h.data.begin(), h.data.end(),
                planted.data.begin() + static_cast<std::ptrdiff_t>(m * r));
      out.objective = make_nmf(std::move(v), r);
      out.f_star = 0.0;
      out.fstar_source = "generator";
      out.planted = std::move(planted);
      out.meta["m"] = static_cast<double>(m);
      out.meta["r"] = static_cast<double>(r);
      return out;
    }
  }
  throw UnknownKind("generate_dataset: unknown recipe kind");
}

DensePoint load_matrix_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<double> data;
  std::size_t rows = 0, cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof() && ls.fail())
      throw IoError(path + ": non-numeric token on line " + std::to_string(rows + 1));
    if (row.empty()) continue;  // blank lines allowed
    if (rows == 0) {
      cols = row.size();
    } else if (row.size() != cols) {
      throw IoError(path + ": line " + std::to_string(rows + 1) + " has " +
                    std::to_string(row.size()) + " values, expected " +
                    std::to_string(cols));
    }
    data.insert(data.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw IoError(path + ": no numeric data");
  DensePoint m = DensePoint::matrix(rows, cols);
  m.data = std::move(data);
  return m;
}

void save_matrix_text(const DensePoint& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  const std::size_t rows = m.rows(), cols = m.cols();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (j) out << ' ';
      out << format_double(m.data[i * cols + j]);
    }
    out << '\n';
  }
  if (!out) throw IoError("short write to " + path);
}

namespace {
constexpr char kBinaryMagic[4] = {'B', 'F', 'W', 'M'};
}

DensePoint load_matrix_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kBinaryMagic, 4) != 0)
    throw IoError(path + ": not a BFWM matrix file");
  std::uint64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!in || rows == 0 || cols == 0) throw IoError(path + ": bad shape header");
  if (rows > (1u << 30) || cols > (1u << 30) || rows * cols > (1ull << 32))
    throw TooLarge(path + ": matrix larger than the loader supports");
  DensePoint m = DensePoint::matrix(rows, cols);
  in.read(reinterpret_cast<char*>(m.data.data()),
          static_cast<std::streamsize>(m.data.size() * sizeof(double)));
  if (!in) throw IoError(path + ": truncated data section");
  return m;
}

void save_matrix_binary(const DensePoint& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(kBinaryMagic, 4);
  const std::uint64_t rows = m.rows(), cols = m.cols();
  out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  out.write(reinterpret_cast<const char*>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * sizeof(double)));
  if (!out) throw IoError("short write to " + path);
}

}  // namespace bregfw

#pragma once

// Tangent-space embedding of SPD matrices and principal geodesic analysis
// (PCA on tangent coordinates at the Karcher mean).

#include "spdgeom/airm.hpp"
#include "spdgeom/frechet_mean.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spdgeom {

// How a matrix is turned into a coordinate vector.
//  Ambient:  sym_vec(A^{1/2} log(A^{-1/2} P A^{-1/2}) A^{1/2})
//  Whitened: sym_vec(log(A^{-1/2} P A^{-1/2})), an isometric chart
//  Raw:      sym_vec(P), no geometry (baseline)
enum class Embedding { Ambient, Whitened, Raw };

std::string_view to_string(Embedding e) noexcept;
Embedding parse_embedding(std::string_view s);

inline std::size_t sym_vec_dim(std::size_t n) { return n * (n + 1) / 2; }

// Upper triangle in row-major order; off-diagonals scaled by sqrt(2) so the
// dot product equals the Frobenius inner product.
Vector sym_vec(const SymMatrix& s);
SymMatrix sym_unvec(const Vector& v, std::size_t n);

struct TangentDataset {
  BasePoint base;
  Matrix vectors;  // N x D
  std::vector<long> labels;  // empty when unlabeled
  Embedding variant = Embedding::Ambient;
  std::size_t n = 0;
};

// Coordinates of one matrix under `variant` at `base`.
Vector embed_one(const BasePoint& base, const SpdMatrix& p, Embedding variant);
SpdMatrix unembed_one(const BasePoint& base, const Vector& v, std::size_t n, Embedding variant);

// The base defaults to the Karcher mean of `set` (default MeanConfig). For
// Embedding::Raw the base is only recorded.
TangentDataset embed(const std::vector<SpdMatrix>& set, std::vector<long> labels = {},
                     const std::optional<SpdMatrix>& base = std::nullopt,
                     Embedding variant = Embedding::Ambient);

struct PgaModel {
  BasePoint base;
  Vector center;              // D
  Matrix axes;                // k x D, orthonormal rows
  Vector explained_variance;  // k, non-increasing
  Embedding variant = Embedding::Ambient;
  std::size_t n = 0;

  std::size_t components() const noexcept { return static_cast<std::size_t>(axes.rows()); }
};

inline constexpr std::size_t kDefaultComponents = 2;

PgaModel pga_fit(const TangentDataset& data, std::size_t k = kDefaultComponents);
// Scores of pre-embedded rows (N x D) -> N x k.
Matrix pga_scores(const PgaModel& model, const Matrix& vectors);
Vector pga_project(const PgaModel& model, const SpdMatrix& p);
SpdMatrix pga_reconstruct(const PgaModel& model, const Vector& scores);

// JSON model file. The base point is stored inline as a CSV block.
std::string pga_to_json(const PgaModel& model);
PgaModel pga_from_json(std::string_view text);

}  // namespace spdgeom

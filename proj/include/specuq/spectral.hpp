#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "specuq/numeric.hpp"

namespace specuq {

enum class Method { num_set, eig_v, deg, ecc, lexi_sim };

std::string_view method_name(Method method);  // "NumSet", "EigV", "Deg", "Ecc", "LexiSim"

// U(x) plus, for confidence measures, C(x, s_j) for every response.
struct MeasureScores {
  Method measure;
  double u = 0.0;
  std::optional<std::vector<double>> c;
};

// L = I - D^{-1/2} W D^{-1/2} with D_jj = sum_j' w_jj' (self-similarity included).
struct Laplacian {
  Matrix l;
  Vector degrees;

  std::size_t size() const noexcept { return static_cast<std::size_t>(l.rows()); }
};

// `w` must be symmetric with entries in [0,1] and unit diagonal.
Laplacian laplacian(const Matrix& w);

struct JacobiOptions {
  double tolerance = 1e-12;  // max |off-diagonal| at convergence
  int max_sweeps = 50;
};

struct EigenSystem {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // column i pairs with eigenvalues[i]
  int sweeps = 0;
};

// Cyclic Jacobi on a symmetric matrix. Eigenpairs come back ascending with
// each eigenvector's largest-magnitude component made positive. Throws
// ConvergenceError if the off-diagonal mass does not reach the tolerance.
EigenSystem jacobi_eigen(const Matrix& symmetric, const JacobiOptions& options = {});

struct SpectralSummary {
  Vector eigenvalues;   // ascending, clamped to [0,2]
  Matrix eigenvectors;  // orthonormal columns aligned to eigenvalues

  std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
  // k = max(1, #{i : lambda_i <= threshold}).
  std::size_t embedding_dim(double threshold) const;
};

SpectralSummary eigen_decompose(const Laplacian& laplacian, const JacobiOptions& options = {});

// sum_k max(0, 1 - lambda_k). No per-response confidence.
MeasureScores u_eigv(const SpectralSummary& spectrum);

// U = trace(mI - D) / m^2, C_j = D_jj / m.
MeasureScores deg_scores(const Laplacian& laplacian);

// Row j is v_j, the j-th components of the k smallest eigenvectors.
Matrix ecc_embed(const SpectralSummary& spectrum, double threshold);

// Offsets from the mean embedding: U = ||[v'_1, ..., v'_m]||, C_j = -||v'_j||.
MeasureScores ecc_scores(const Matrix& embeddings);

}  // namespace specuq

#include "specuq/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "specuq/error.hpp"

namespace specuq {

std::string_view method_name(Method method) {
  switch (method) {
    case Method::num_set: return "NumSet";
    case Method::eig_v: return "EigV";
    case Method::deg: return "Deg";
    case Method::ecc: return "Ecc";
    case Method::lexi_sim: return "LexiSim";
  }
  return "unknown";
}

Laplacian laplacian(const Matrix& w) {
  if (w.rows() != w.cols()) throw ValidationError("adjacency matrix must be square");
  const Eigen::Index m = w.rows();
  Laplacian out;
  out.degrees.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    CompensatedSum d;
    for (Eigen::Index j = 0; j < m; ++j) d += w(i, j);
    out.degrees[i] = d.value();
  }
  Vector inv_sqrt(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(out.degrees[i] > 0.0)) throw ValidationError("adjacency matrix has a node of zero degree");
    inv_sqrt[i] = 1.0 / std::sqrt(out.degrees[i]);
  }
  out.l.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      out.l(i, j) = (i == j ? 1.0 : 0.0) - w(i, j) * inv_sqrt[i] * inv_sqrt[j];
    }
  }
  out.l = (0.5 * (out.l + out.l.transpose())).eval();
  return out;
}

namespace {

double max_off_diagonal(const Matrix& a) {
  double off = 0.0;
  for (Eigen::Index p = 0; p < a.rows(); ++p) {
    for (Eigen::Index q = p + 1; q < a.cols(); ++q) off = std::max(off, std::abs(a(p, q)));
  }
  return off;
}

void rotate(Matrix& a, Matrix& v, Eigen::Index p, Eigen::Index q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k == p || k == q) continue;
    const double akp = a(k, p);
    const double akq = a(k, q);
    a(k, p) = a(p, k) = c * akp - s * akq;
    a(k, q) = a(q, k) = s * akp + c * akq;
  }
  a(p, p) -= t * apq;
  a(q, q) += t * apq;
  a(p, q) = a(q, p) = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

}  // namespace

EigenSystem jacobi_eigen(const Matrix& symmetric, const JacobiOptions& options) {
  if (symmetric.rows() != symmetric.cols()) throw ValidationError("eigensolver needs a square matrix");
  const Eigen::Index n = symmetric.rows();
  Matrix a = 0.5 * (symmetric + symmetric.transpose());
  Matrix v = Matrix::Identity(n, n);

  int sweeps = 0;
  double off = max_off_diagonal(a);
  while (off > options.tolerance) {
    if (sweeps == options.max_sweeps) {
      throw ConvergenceError("Jacobi eigensolver did not converge in " + std::to_string(sweeps) +
                                 " sweeps (max off-diagonal " + std::to_string(off) + ")",
                             off);
    }
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) rotate(a, v, p, q);
    }
    ++sweeps;
    off = max_off_diagonal(a);
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });

  EigenSystem out;
  out.sweeps = sweeps;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    out.eigenvalues[i] = a(src, src);
    Vector col = v.col(src);
    const double peak = col.cwiseAbs().maxCoeff();
    Eigen::Index lead = 0;
    while (std::abs(col[lead]) < peak - 1e-12) ++lead;
    if (col[lead] < 0.0) col = -col;
    out.eigenvectors.col(i) = col;
  }
  return out;
}

std::size_t SpectralSummary::embedding_dim(double threshold) const {
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) k += eigenvalues[i] <= threshold;
  return std::max<std::size_t>(1, k);
}

SpectralSummary eigen_decompose(const Laplacian& lap, const JacobiOptions& options) {
  EigenSystem sys = jacobi_eigen(lap.l, options);
  SpectralSummary out;
  out.eigenvalues = sys.eigenvalues.cwiseMax(0.0).cwiseMin(2.0);
  out.eigenvectors = std::move(sys.eigenvectors);
  return out;
}

MeasureScores u_eigv(const SpectralSummary& spectrum) {
  CompensatedSum u;
  for (Eigen::Index k = 0; k < spectrum.eigenvalues.size(); ++k) {
    u += std::max(0.0, 1.0 - spectrum.eigenvalues[k]);
  }
  return {Method::eig_v, u.value(), std::nullopt};
}

MeasureScores deg_scores(const Laplacian& lap) {
  const auto m = static_cast<double>(lap.size());
  CompensatedSum trace;
  std::vector<double> c(lap.size());
  for (std::size_t j = 0; j < lap.size(); ++j) {
    trace += m - lap.degrees[static_cast<Eigen::Index>(j)];
    c[j] = lap.degrees[static_cast<Eigen::Index>(j)] / m;
  }
  return {Method::deg, trace.value() / (m * m), std::move(c)};
}

Matrix ecc_embed(const SpectralSummary& spectrum, double threshold) {
  const auto k = static_cast<Eigen::Index>(spectrum.embedding_dim(threshold));
  return spectrum.eigenvectors.leftCols(k);
}

MeasureScores ecc_scores(const Matrix& embeddings) {
  const Eigen::Index m = embeddings.rows();
  const Eigen::Index k = embeddings.cols();
  Eigen::RowVectorXd center(k);
  for (Eigen::Index d = 0; d < k; ++d) {
    CompensatedSum s;
    for (Eigen::Index j = 0; j < m; ++j) s += embeddings(j, d);
    center[d] = m == 0 ? 0.0 : s.value() / static_cast<double>(m);
  }
  CompensatedSum total;
  std::vector<double> c(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) {
    CompensatedSum sq;
    for (Eigen::Index d = 0; d < k; ++d) {
      const double off = embeddings(j, d) - center[d];
      sq += off * off;
    }
    total += sq.value();
    c[static_cast<std::size_t>(j)] = 0.0 - std::sqrt(sq.value());
  }
  return {Method::ecc, std::sqrt(total.value()), std::move(c)};
}

}  // namespace specuq

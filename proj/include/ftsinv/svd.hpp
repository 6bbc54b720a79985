#pragma once

// Offline singular value decomposition and penalized reciprocal diagonals
// for pseudo-inverse, truncated-SVD and Tikhonov inversion.

#include <Eigen/Core>

#include <variant>

namespace fts::svd {

/// A = U diag(xi) V^T with U M x R, V N x R, R = min(M, N) and xi sorted in
/// decreasing order.
struct SvdFactors {
  Eigen::MatrixXd U;
  Eigen::VectorXd xi;
  Eigen::MatrixXd V;

  Eigen::Index rank_capacity() const { return xi.size(); }
  Eigen::MatrixXd reconstruct() const;
};

struct JacobiOptions {
  int max_sweeps = 60;
  double tolerance = 1e-15;
};

/// One-sided (Hestenes) Jacobi SVD. Throws DomainError on non-finite input
/// and NumericalFailure when the sweep cap is reached without convergence.
SvdFactors svd_factorize(const Eigen::MatrixXd& A, const JacobiOptions& options = {});

struct Pinv {};
struct Tsvd {
  int rank = 1;
};
struct Tikhonov {
  double lambda = 0.0;
};
using Scheme = std::variant<Pinv, Tsvd, Tikhonov>;

const char* scheme_name(const Scheme& scheme);

/// Singular values below this fraction of the largest are treated as zero by
/// the pseudo-inverse.
inline constexpr double kPinvRelativeThreshold = 1e-12;

struct PenalizedDiagonal {
  Eigen::VectorXd zeta;
  Scheme scheme;

  /// Number of nonzero coefficients.
  int effective_rank() const;
};

/// Reciprocal diagonal under `scheme`:
///   Pinv      1/xi for xi >= threshold * xi_max, 0 otherwise
///   Tsvd(R')  1/xi for the first R' values, 0 beyond
///   Tikhonov  xi / (xi^2 + lambda^2)
/// Throws DomainError for R' outside [1, R], lambda < 0, a zero singular
/// value inside the kept TSVD range, or lambda = 0 with a zero singular value.
PenalizedDiagonal penalize(const Eigen::VectorXd& xi, const Scheme& scheme);

/// V diag(zeta) U^T.
Eigen::MatrixXd penalized_inverse(const SvdFactors& f, const PenalizedDiagonal& z);

/// Moore-Penrose pseudo-inverse from the factors, N x M.
Eigen::MatrixXd pinv_matrix(const SvdFactors& f);

}  // namespace fts::svd

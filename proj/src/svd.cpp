#include "ftsinv/svd.hpp"

#include "ftsinv/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fts::svd {

namespace {

// Extend the orthonormal columns [0, filled) of Q to a full orthonormal set by
// Gram-Schmidt on canonical basis vectors.
void complete_orthonormal(Eigen::MatrixXd& Q, Eigen::Index filled) {
  Eigen::Index candidate = 0;
  for (Eigen::Index c = filled; c < Q.cols(); ++c) {
    for (;; ++candidate) {
      if (candidate >= Q.rows()) throw NumericalFailure("svd: cannot complete orthonormal basis");
      Eigen::VectorXd v = Eigen::VectorXd::Unit(Q.rows(), candidate);
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index j = 0; j < c; ++j) v -= Q.col(j).dot(v) * Q.col(j);
      const double norm = v.norm();
      if (norm > 1e-8) {
        Q.col(c) = v / norm;
        ++candidate;
        break;
      }
    }
  }
}

SvdFactors jacobi_tall(const Eigen::MatrixXd& A, const JacobiOptions& opt) {
  const Eigen::Index n = A.cols();
  Eigen::MatrixXd B = A;
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);

  bool converged = false;
  for (int sweep = 0; sweep < opt.max_sweeps && !converged; ++sweep) {
    converged = true;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = B.col(p).squaredNorm();
        const double beta = B.col(q).squaredNorm();
        const double gamma = B.col(p).dot(B.col(q));
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= opt.tolerance * std::sqrt(alpha * beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        for (Eigen::Index i = 0; i < B.rows(); ++i) {
          const double bp = B(i, p), bq = B(i, q);
          B(i, p) = c * bp - s * bq;
          B(i, q) = s * bp + c * bq;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double vp = V(i, p), vq = V(i, q);
          V(i, p) = c * vp - s * vq;
          V(i, q) = s * vp + c * vq;
        }
      }
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << "svd: Jacobi iteration did not converge in " << opt.max_sweeps << " sweeps";
    throw NumericalFailure(os.str());
  }

  Eigen::VectorXd norms = B.colwise().norm().transpose();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return norms(a) > norms(b); });

  SvdFactors f{Eigen::MatrixXd::Zero(A.rows(), n), Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  const double cutoff = norms.size() ? norms.maxCoeff() * 1e-300 : 0.0;
  Eigen::Index filled = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index j = order[k];
    f.xi(k) = norms(j);
    f.V.col(k) = V.col(j);
    if (norms(j) > cutoff && norms(j) > 0) {
      f.U.col(k) = B.col(j) / norms(j);
      filled = k + 1;
    }
  }
  complete_orthonormal(f.U, filled);
  return f;
}

}  // namespace

Eigen::MatrixXd SvdFactors::reconstruct() const { return U * xi.asDiagonal() * V.transpose(); }

SvdFactors svd_factorize(const Eigen::MatrixXd& A, const JacobiOptions& options) {
  if (A.size() == 0) throw DimensionError("svd: empty matrix");
  if (!A.allFinite()) throw DomainError("svd: non-finite matrix entry");
  if (A.rows() >= A.cols()) return jacobi_tall(A, options);
  SvdFactors t = jacobi_tall(A.transpose(), options);
  return {std::move(t.V), std::move(t.xi), std::move(t.U)};
}

const char* scheme_name(const Scheme& scheme) {
  if (std::holds_alternative<Pinv>(scheme)) return "pinv";
  if (std::holds_alternative<Tsvd>(scheme)) return "tsvd";
  return "tik";
}

int PenalizedDiagonal::effective_rank() const {
  return static_cast<int>((zeta.array() != 0.0).count());
}

PenalizedDiagonal penalize(const Eigen::VectorXd& xi, const Scheme& scheme) {
  const Eigen::Index r = xi.size();
  if (r == 0) throw DimensionError("penalize: no singular values");
  if ((xi.array() < 0).any() || !xi.allFinite())
    throw DomainError("penalize: singular values must be finite and non-negative");
  PenalizedDiagonal out{Eigen::VectorXd::Zero(r), scheme};

  if (std::holds_alternative<Pinv>(scheme)) {
    const double cut = kPinvRelativeThreshold * xi.maxCoeff();
    for (Eigen::Index i = 0; i < r; ++i)
      if (xi(i) > 0 && xi(i) >= cut) out.zeta(i) = 1.0 / xi(i);
  } else if (const auto* t = std::get_if<Tsvd>(&scheme)) {
    if (t->rank < 1 || t->rank > r) throw DomainError("penalize: TSVD rank outside [1, R]");
    for (Eigen::Index i = 0; i < t->rank; ++i) {
      if (xi(i) == 0) throw DomainError("penalize: zero singular value inside the kept TSVD range");
      out.zeta(i) = 1.0 / xi(i);
    }
  } else {
    const double lambda = std::get<Tikhonov>(scheme).lambda;
    if (!(lambda >= 0) || !std::isfinite(lambda)) throw DomainError("penalize: lambda must be >= 0");
    const double l2 = lambda * lambda;
    for (Eigen::Index i = 0; i < r; ++i) {
      if (xi(i) == 0) {
        if (lambda == 0) throw DomainError("penalize: zero singular value with lambda = 0");
        continue;
      }
      // Same value as xi / (xi^2 + lambda^2), but exactly 1/xi at lambda = 0.
      out.zeta(i) = 1.0 / (xi(i) + l2 / xi(i));
    }
  }
  return out;
}

Eigen::MatrixXd penalized_inverse(const SvdFactors& f, const PenalizedDiagonal& z) {
  if (z.zeta.size() != f.xi.size()) throw DimensionError("penalized_inverse: diagonal size differs");
  return f.V * z.zeta.asDiagonal() * f.U.transpose();
}

Eigen::MatrixXd pinv_matrix(const SvdFactors& f) { return penalized_inverse(f, penalize(f.xi, Pinv{})); }

}  // namespace fts::svd

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ftsinv/error.hpp"
#include "ftsinv/svd.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <random>

using namespace fts;
using namespace fts::svd;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = g(rng);
  return a;
}

void check_factors(const Eigen::MatrixXd& a, const SvdFactors& f) {
  const Eigen::Index r = std::min(a.rows(), a.cols());
  REQUIRE(f.U.rows() == a.rows());
  REQUIRE(f.U.cols() == r);
  REQUIRE(f.V.rows() == a.cols());
  REQUIRE(f.V.cols() == r);
  REQUIRE(f.xi.size() == r);
  const double scale = std::max(1.0, a.norm());
  CHECK((f.reconstruct() - a).norm() <= 1e-12 * scale);
  CHECK((f.U.transpose() * f.U - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((f.V.transpose() * f.V - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff() < 1e-12);
  for (Eigen::Index i = 0; i < r; ++i) {
    CHECK(f.xi(i) >= 0);
    if (i > 0) CHECK(f.xi(i) <= f.xi(i - 1));
  }
}

}  // namespace

TEST_CASE("identity and diagonal examples") {
  const auto id = svd_factorize(Eigen::MatrixXd::Identity(5, 5));
  check_factors(Eigen::MatrixXd::Identity(5, 5), id);
  CHECK((id.xi - Eigen::VectorXd::Ones(5)).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d.diagonal() << 1, 3, 2;
  const auto f = svd_factorize(d);
  check_factors(d, f);
  CHECK(f.xi(0) == doctest::Approx(3));
  CHECK(f.xi(1) == doctest::Approx(2));
  CHECK(f.xi(2) == doctest::Approx(1));
}

TEST_CASE("tall, wide and rank-deficient matrices") {
  for (auto [rows, cols] : {std::pair{16, 12}, std::pair{12, 16}, std::pair{64, 48}, std::pair{1, 7}}) {
    CAPTURE(rows);
    CAPTURE(cols);
    const auto a = random_matrix(rows, cols, rows * 100 + cols);
    check_factors(a, svd_factorize(a));
  }
  // Rank 3 matrix: trailing singular values vanish but U stays orthonormal.
  const Eigen::MatrixXd low = random_matrix(10, 3, 5) * random_matrix(3, 8, 6);
  const auto f = svd_factorize(low);
  check_factors(low, f);
  CHECK(f.xi.tail(5).maxCoeff() < 1e-12 * f.xi(0));

  const auto z = svd_factorize(Eigen::MatrixXd::Zero(4, 3));
  check_factors(Eigen::MatrixXd::Zero(4, 3), z);
  CHECK(z.xi.isZero());
}

TEST_CASE("singular values match Gram eigenvalues") {
  const auto a = random_matrix(30, 20, 9);
  const auto f = svd_factorize(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a.transpose() * a);
  const Eigen::VectorXd ev = eig.eigenvalues().reverse().cwiseMax(0).cwiseSqrt();
  CHECK((ev - f.xi).cwiseAbs().maxCoeff() < 1e-10 * f.xi(0));
}

TEST_CASE("svd input checks") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Ones(3, 3);
  a(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd_factorize(a), DomainError);
  CHECK_THROWS_AS(svd_factorize(random_matrix(20, 20, 1), JacobiOptions{0, 1e-15}), NumericalFailure);
}

TEST_CASE("penalize examples") {
  const Eigen::Vector3d xi(4, 2, 1);
  const auto p = penalize(xi, Pinv{});
  CHECK(p.zeta.isApprox(Eigen::Vector3d(0.25, 0.5, 1.0)));
  CHECK(p.effective_rank() == 3);

  const auto t = penalize(xi, Tsvd{2});
  CHECK(t.zeta(0) == 0.25);
  CHECK(t.zeta(1) == 0.5);
  CHECK(t.zeta(2) == 0.0);
  CHECK(t.effective_rank() == 2);

  const auto k = penalize(Eigen::VectorXd::Ones(1), Tikhonov{1.0});
  CHECK(k.zeta(0) == doctest::Approx(0.5));

  const auto k0 = penalize(xi, Tikhonov{0.0});
  CHECK((k0.zeta - p.zeta).cwiseAbs().maxCoeff() < 1e-15);

  // zeta decreases with lambda for every coefficient.
  const auto k1 = penalize(xi, Tikhonov{0.5});
  const auto k2 = penalize(xi, Tikhonov{1.5});
  CHECK((k2.zeta.array() < k1.zeta.array()).all());
  CHECK((k1.zeta.array() < p.zeta.array()).all());

  CHECK(std::string(scheme_name(Pinv{})) == "pinv");
  CHECK(std::string(scheme_name(Tsvd{1})) == "tsvd");
  CHECK(std::string(scheme_name(Tikhonov{})) == "tik");
}

TEST_CASE("pseudo-inverse drops negligible singular values") {
  const Eigen::Vector3d xi(1, 1e-6, 1e-14);
  const auto p = penalize(xi, Pinv{});
  CHECK(p.zeta(1) == doctest::Approx(1e6));
  CHECK(p.zeta(2) == 0.0);
  CHECK(p.effective_rank() == 2);
}

TEST_CASE("penalize errors") {
  const Eigen::Vector3d xi(4, 2, 0);
  CHECK_THROWS_AS(penalize(xi, Tsvd{0}), DomainError);
  CHECK_THROWS_AS(penalize(xi, Tsvd{4}), DomainError);
  CHECK_THROWS_AS(penalize(xi, Tsvd{3}), DomainError);
  CHECK_NOTHROW(penalize(xi, Tsvd{2}));
  CHECK_THROWS_AS(penalize(xi, Tikhonov{-1}), DomainError);
  CHECK_THROWS_AS(penalize(xi, Tikhonov{0}), DomainError);
  CHECK(penalize(xi, Tikhonov{0.1}).zeta(2) == 0.0);
}

TEST_CASE("pinv matrix and penalized inverse") {
  const auto a = random_matrix(20, 16, 12);
  const auto f = svd_factorize(a);
  const auto p = pinv_matrix(f);
  CHECK(p.rows() == 16);
  CHECK(p.cols() == 20);
  CHECK((p * a - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((a * p * a - a).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((penalized_inverse(f, penalize(f.xi, Tsvd{16})) - p).cwiseAbs().maxCoeff() < 1e-10);

  const auto tik = penalized_inverse(f, penalize(f.xi, Tikhonov{0.5}));
  const Eigen::MatrixXd direct =
      (a.transpose() * a + 0.25 * Eigen::MatrixXd::Identity(16, 16)).inverse() * a.transpose();
  CHECK((tik - direct).cwiseAbs().maxCoeff() < 1e-10);
}

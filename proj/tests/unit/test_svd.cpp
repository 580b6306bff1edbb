#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "viralens/corpus.hpp"
#include "viralens/error.hpp"
#include "viralens/svd.hpp"

using namespace viralens;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& gen, int m, int n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(m, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(gen);
  return a;
}

void check_factorization(const Eigen::MatrixXd& a) {
  const auto s = svd(a);
  const auto r = static_cast<Eigen::Index>(std::min(a.rows(), a.cols()));
  REQUIRE(s.singular_values.size() == r);
  for (Eigen::Index i = 1; i < r; ++i) CHECK(s.singular_values(i) <= s.singular_values(i - 1));
  CHECK((s.left.transpose() * s.left - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((s.right.transpose() * s.right - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff() < 1e-10);
  const Eigen::MatrixXd back = s.left * s.singular_values.asDiagonal() * s.right.transpose();
  CHECK((a - back).norm() <= 1e-10 * std::max(1.0, a.norm()));

  // Squared singular values are the eigenvalues of the Gram matrix.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a.cols() <= a.rows() ? Eigen::MatrixXd(a.transpose() * a)
                                                                            : Eigen::MatrixXd(a * a.transpose()));
  Eigen::VectorXd ev = eig.eigenvalues().reverse().cwiseMax(0.0);
  for (Eigen::Index i = 0; i < r; ++i)
    CHECK(std::abs(s.singular_values(i) * s.singular_values(i) - ev(i)) <= 1e-9 * std::max(1.0, a.squaredNorm()));
}

}  // namespace

TEST_CASE("svd of random tall, wide and square matrices") {
  std::mt19937_64 gen(8);
  for (int i = 0; i < 20; ++i) {
    check_factorization(random_matrix(gen, 6, 5));
    check_factorization(random_matrix(gen, 3, 7));
    check_factorization(random_matrix(gen, 4, 4));
  }
}

TEST_CASE("svd of rank-deficient input keeps orthonormal factors") {
  Eigen::MatrixXd a(5, 4);
  a << 1, 2, 3, 4,  //
      2, 4, 6, 8,   //
      0, 0, 0, 0,   //
      1, 0, 1, 0,   //
      3, 4, 7, 8;
  check_factorization(a);
  const auto s = svd(a);
  CHECK(s.singular_values(2) < 1e-10);
  check_factorization(Eigen::MatrixXd::Zero(3, 2));
}

TEST_CASE("svd input validation") {
  CHECK_THROWS_AS(svd(Eigen::MatrixXd(0, 3)), Error);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(svd(bad), Error);
}

TEST_CASE("energy reduction") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 4;
  d(1, 1) = 3;
  CHECK(reduce_energy(d, 0.95).rank == 2);
  const auto half = reduce_energy(d, 0.6);
  CHECK(half.rank == 1);
  CHECK(half.retained_energy == doctest::Approx(16.0 / 25.0));
  CHECK(half.reduced.cols() == 1);
  CHECK(std::abs(half.reduced(0, 0)) == doctest::Approx(4.0));

  // Threshold landing exactly on a cumulative share keeps that rank.
  CHECK(reduce_energy(d, 16.0 / 25.0).rank == 1);
  CHECK(reduce_energy(d, 1.0).rank == 2);

  const auto zero = reduce_energy(Eigen::MatrixXd::Zero(3, 3), 0.95);
  CHECK(zero.rank == 0);
  CHECK(zero.reduced.cols() == 0);

  CHECK_THROWS_AS(reduce_energy(d, 0.0), Error);
  CHECK_THROWS_AS(reduce_energy(d, 1.5), Error);
}

TEST_CASE("reduced features equal projection onto the right factors") {
  std::mt19937_64 gen(2);
  const Eigen::MatrixXd a = random_matrix(gen, 8, 5);
  const auto red = reduce_energy(a, 0.8);
  CHECK((red.reduced - a * red.factors.right).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("dense copy of a doc-term matrix") {
  const DocTermMatrix m({"a", "b"}, {"x", "y"}, {{{1, 3}}, {{0, 1}}});
  const Eigen::MatrixXd d = to_dense(m);
  CHECK(d(0, 1) == 3);
  CHECK(d(1, 0) == 1);
  CHECK(d(0, 0) == 0);
}

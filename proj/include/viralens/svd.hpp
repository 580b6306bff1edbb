#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace viralens {

class DocTermMatrix;

struct SvdResult {
  Eigen::VectorXd singular_values;  // non-increasing
  Eigen::MatrixXd left;             // M x r, orthonormal columns
  Eigen::MatrixXd right;            // V x r, orthonormal columns
  std::size_t rank = 0;             // retained columns
  double retained_energy = 1.0;     // share of sum(sigma^2) kept
};

/// Thin SVD, r = min(M, V), by one-sided (Hestenes) Jacobi rotations.
SvdResult svd(const Eigen::MatrixXd& a);

struct EnergyReduction {
  Eigen::MatrixXd reduced;  // M x r, equal to U_r * Sigma_r
  std::size_t rank = 0;
  double retained_energy = 1.0;
  SvdResult factors;        // truncated to the retained rank
};

/// Keeps the smallest rank whose cumulative squared singular values reach
/// `threshold` of the total. A zero matrix keeps rank 0.
EnergyReduction reduce_energy(const Eigen::MatrixXd& a, double threshold = 0.95);

Eigen::MatrixXd to_dense(const DocTermMatrix& m);

}  // namespace viralens

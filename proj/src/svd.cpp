#include "viralens/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "viralens/corpus.hpp"
#include "viralens/error.hpp"

namespace viralens {

namespace {

// Requires rows >= cols. Returns U (rows x cols), sigma, V (cols x cols).
SvdResult jacobi_tall(const Eigen::MatrixXd& a) {
  const Eigen::Index m = a.rows(), n = a.cols();
  Eigen::MatrixXd w = a;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  constexpr double eps = std::numeric_limits<double>::epsilon();

  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = w.col(p).squaredNorm();
        const double beta = w.col(q).squaredNorm();
        const double gamma = w.col(p).dot(w.col(q));
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        const Eigen::VectorXd wp = w.col(p);
        w.col(p) = c * wp - s * w.col(q);
        w.col(q) = s * wp + c * w.col(q);
        const Eigen::VectorXd vp = v.col(p);
        v.col(p) = c * vp - s * v.col(q);
        v.col(q) = s * vp + c * v.col(q);
      }
    }
    if (!rotated) break;
  }

  Eigen::VectorXd sigma(n);
  for (Eigen::Index j = 0; j < n; ++j) sigma(j) = w.col(j).norm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return sigma(x) > sigma(y); });

  SvdResult out;
  out.singular_values.resize(n);
  out.left.resize(m, n);
  out.right.resize(n, n);
  const double tiny = sigma.maxCoeff() * static_cast<double>(std::max(m, n)) * eps;
  std::vector<Eigen::Index> null_cols;
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    out.singular_values(j) = sigma(src);
    out.right.col(j) = v.col(src);
    if (sigma(src) > tiny && sigma(src) > 0.0) {
      out.left.col(j) = w.col(src) / sigma(src);
    } else {
      null_cols.push_back(j);
    }
  }

  // Left vectors of (numerically) zero singular values are arbitrary; pick
  // an orthonormal completion from the standard basis.
  std::vector<bool> filled(static_cast<std::size_t>(n), true);
  for (Eigen::Index j : null_cols) filled[static_cast<std::size_t>(j)] = false;
  for (Eigen::Index j : null_cols) {
    Eigen::VectorXd best;
    double best_norm = -1.0;
    for (Eigen::Index e = 0; e < m; ++e) {
      Eigen::VectorXd cand = Eigen::VectorXd::Unit(m, e);
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index c = 0; c < n; ++c)
          if (filled[static_cast<std::size_t>(c)]) cand -= out.left.col(c).dot(cand) * out.left.col(c);
      if (const double norm = cand.norm(); norm > best_norm) {
        best_norm = norm;
        best = std::move(cand);
      }
    }
    out.left.col(j) = best / best_norm;
    filled[static_cast<std::size_t>(j)] = true;
  }
  out.rank = static_cast<std::size_t>(n);
  out.retained_energy = 1.0;
  return out;
}

void check_input(const Eigen::MatrixXd& a) {
  if (a.rows() < 1 || a.cols() < 1) fail(ErrorKind::Argument, "svd: matrix must be at least 1x1");
  if (!a.allFinite()) fail(ErrorKind::Argument, "svd: matrix has non-finite entries");
}

}  // namespace

SvdResult svd(const Eigen::MatrixXd& a) {
  check_input(a);
  if (a.rows() >= a.cols()) return jacobi_tall(a);
  SvdResult t = jacobi_tall(a.transpose());
  std::swap(t.left, t.right);
  return t;
}

EnergyReduction reduce_energy(const Eigen::MatrixXd& a, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) fail(ErrorKind::Argument, "reduce_energy: threshold must lie in (0, 1]");
  SvdResult f = svd(a);
  const Eigen::VectorXd energy = f.singular_values.array().square();
  const double total = energy.sum();

  std::size_t r = 0;
  double kept = 0.0;
  if (total > 0.0) {
    // Relative slack absorbs rounding when threshold == 1.
    const double target = threshold * total * (1.0 - 1e-12);
    while (r < static_cast<std::size_t>(energy.size()) && kept < target) kept += energy(static_cast<Eigen::Index>(r++));
  }
  const double retained = total > 0.0 ? kept / total : 1.0;
  const auto rr = static_cast<Eigen::Index>(r);

  EnergyReduction out;
  out.rank = r;
  out.retained_energy = retained;
  out.factors.singular_values = f.singular_values.head(rr);
  out.factors.left = f.left.leftCols(rr);
  out.factors.right = f.right.leftCols(rr);
  out.factors.rank = r;
  out.factors.retained_energy = retained;
  out.reduced = out.factors.left * out.factors.singular_values.asDiagonal();
  return out;
}

Eigen::MatrixXd to_dense(const DocTermMatrix& m) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.num_docs()),
                                              static_cast<Eigen::Index>(m.num_words()));
  for (std::size_t d = 0; d < m.num_docs(); ++d)
    for (const TermCount& tc : m.row(d)) out(static_cast<Eigen::Index>(d), tc.word) = tc.count;
  return out;
}

}  // namespace viralens

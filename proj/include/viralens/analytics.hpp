#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace viralens {

/// Argmax per row, ties toward the lower index.
std::vector<std::uint32_t> cluster_assign(const Eigen::MatrixXd& theta);

/// One row of the cluster-statistics table. Mean is undefined for an empty
/// cluster, variance for clusters with fewer than two members.
struct ClusterSummary {
  std::uint64_t frequency = 0;
  std::optional<double> mean;
  std::optional<double> variance;  // unbiased (n - 1 denominator)
  std::string label;
};

struct ClusterStats {
  std::vector<ClusterSummary> clusters;

  std::size_t size() const noexcept { return clusters.size(); }
  const ClusterSummary& operator[](std::size_t k) const { return clusters[k]; }
};

ClusterStats cluster_stats(std::span<const std::uint32_t> assignments, std::span<const double> activity,
                           std::size_t k);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
/// Student's t cumulative distribution function.
double t_cdf(double t, double df);
/// Inverse of t_cdf for integer df >= 1 and 0 < p < 1.
double t_quantile(double df, double p);

struct GroupSummary {
  double n = 0;
  double mean = 0;
  double variance = 0;
};

struct PairwiseTestResult {
  double t_stat = 0.0;
  int df = 0;
  double t_crit = 0.0;
  bool significant = false;
};

/// Pooled-variance (Student) two-sample t-test from summary statistics.
/// Returns nullopt when the test is undefined (df < 1 or zero pooled variance).
std::optional<PairwiseTestResult> pooled_t_test(const GroupSummary& a, const GroupSummary& b,
                                                double confidence = 0.95);

/// Upper-triangular matrix of tests; entry (i, j) for i < j.
class PairwiseMatrix {
 public:
  explicit PairwiseMatrix(std::size_t n = 0) : n_(n), cells_(n * n) {}

  std::size_t size() const noexcept { return n_; }
  const std::optional<PairwiseTestResult>& at(std::size_t i, std::size_t j) const { return cells_[i * n_ + j]; }
  std::optional<PairwiseTestResult>& at(std::size_t i, std::size_t j) { return cells_[i * n_ + j]; }
  std::size_t pair_count() const noexcept { return n_ < 2 ? 0 : n_ * (n_ - 1) / 2; }

 private:
  std::size_t n_;
  std::vector<std::optional<PairwiseTestResult>> cells_;
};

PairwiseMatrix pairwise_matrix(const ClusterStats& stats, double confidence = 0.95);

using TermFrequency = std::pair<std::string, std::uint64_t>;

/// Lowercased, punctuation-stripped whitespace tokens of a title.
std::vector<std::string> title_terms(const std::string& title);

/// Top `top_n` terms per cluster by descending frequency, ties lexicographic.
std::vector<std::vector<TermFrequency>> word_cloud_terms(const std::vector<std::vector<std::string>>& titles_by_cluster,
                                                         std::size_t top_n);

}  // namespace viralens

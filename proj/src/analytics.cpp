#include "viralens/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "viralens/error.hpp"
#include "viralens/text.hpp"

namespace viralens {

std::vector<std::uint32_t> cluster_assign(const Eigen::MatrixXd& theta) {
  std::vector<std::uint32_t> out(static_cast<std::size_t>(theta.rows()), 0);
  for (Eigen::Index d = 0; d < theta.rows(); ++d) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < theta.cols(); ++k)
      if (theta(d, k) > theta(d, best)) best = k;
    out[static_cast<std::size_t>(d)] = static_cast<std::uint32_t>(best);
  }
  return out;
}

ClusterStats cluster_stats(std::span<const std::uint32_t> assignments, std::span<const double> activity,
                           std::size_t k) {
  if (assignments.size() != activity.size())
    fail(ErrorKind::Argument, "cluster_stats: assignments and activity differ in length");
  std::vector<std::vector<double>> groups(k);
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] >= k) fail(ErrorKind::Argument, "cluster_stats: assignment out of range");
    groups[assignments[i]].push_back(activity[i]);
  }

  ClusterStats out;
  out.clusters.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const auto& g = groups[c];
    auto& s = out.clusters[c];
    s.frequency = g.size();
    if (g.empty()) continue;
    double mean = 0.0;
    for (double x : g) mean += x;
    mean /= static_cast<double>(g.size());
    s.mean = mean;
    if (g.size() < 2) continue;
    double ss = 0.0;
    for (double x : g) ss += (x - mean) * (x - mean);
    s.variance = ss / static_cast<double>(g.size() - 1);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 200000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  fail(ErrorKind::Compute, "incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) fail(ErrorKind::Argument, "incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) fail(ErrorKind::Argument, "incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double t_cdf(double t, double df) {
  if (!(df > 0.0)) fail(ErrorKind::Argument, "t_cdf: df must be positive");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t > 0.0 ? 1.0 - tail : tail;
}

double t_quantile(double df, double p) {
  if (!(df >= 1.0)) fail(ErrorKind::Argument, "t_quantile: df must be >= 1");
  if (!(p > 0.0 && p < 1.0)) fail(ErrorKind::Argument, "t_quantile: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -t_quantile(df, 1.0 - p);

  double lo = 0.0, hi = 2.0;
  while (t_cdf(hi, df) < p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) fail(ErrorKind::Compute, "t_quantile: cannot bracket root");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    (t_cdf(mid, df) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::optional<PairwiseTestResult> pooled_t_test(const GroupSummary& a, const GroupSummary& b, double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) fail(ErrorKind::Argument, "confidence must lie in (0, 1)");
  if (a.n < 1 || b.n < 1 || a.n + b.n < 3) return std::nullopt;
  if (!std::isfinite(a.variance) || !std::isfinite(b.variance) || a.variance < 0 || b.variance < 0)
    return std::nullopt;

  const double df = a.n + b.n - 2.0;
  const double pooled = ((a.n - 1.0) * a.variance + (b.n - 1.0) * b.variance) / df;
  if (!(pooled > 0.0)) return std::nullopt;

  PairwiseTestResult r;
  r.t_stat = (a.mean - b.mean) / std::sqrt(pooled * (1.0 / a.n + 1.0 / b.n));
  r.df = static_cast<int>(df);
  r.t_crit = t_quantile(df, 1.0 - (1.0 - confidence) / 2.0);
  r.significant = std::abs(r.t_stat) > r.t_crit;
  return r;
}

PairwiseMatrix pairwise_matrix(const ClusterStats& stats, double confidence) {
  const std::size_t n = stats.size();
  PairwiseMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = stats[i];
    if (!a.mean || !a.variance) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& b = stats[j];
      if (!b.mean || !b.variance) continue;
      const GroupSummary ga{static_cast<double>(a.frequency), *a.mean, *a.variance};
      const GroupSummary gb{static_cast<double>(b.frequency), *b.mean, *b.variance};
      out.at(i, j) = pooled_t_test(ga, gb, confidence);
    }
  }
  return out;
}

std::vector<std::string> title_terms(const std::string& title) {
  std::vector<std::string> out;
  std::istringstream in(title);
  std::string raw;
  while (in >> raw) {
    std::string t = normalize_token(raw);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::vector<TermFrequency>> word_cloud_terms(const std::vector<std::vector<std::string>>& titles_by_cluster,
                                                         std::size_t top_n) {
  std::vector<std::vector<TermFrequency>> out;
  for (const auto& titles : titles_by_cluster) {
    std::map<std::string, std::uint64_t> freq;
    for (const auto& title : titles)
      for (auto& t : title_terms(title)) ++freq[t];
    std::vector<TermFrequency> ranked(freq.begin(), freq.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const TermFrequency& x, const TermFrequency& y) { return x.second > y.second; });
    if (ranked.size() > top_n) ranked.resize(top_n);
    out.push_back(std::move(ranked));
  }
  return out;
}

}  // namespace viralens

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace oracle {

double best_partition_inertia(const std::vector<std::vector<double>>& points, std::size_t k) {
  const std::size_t n = points.size();
  const std::size_t dim = points.empty() ? 0 : points[0].size();
  std::vector<std::size_t> label(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<double> mean(dim, 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (label[i] == c) {
          ++count;
          for (std::size_t j = 0; j < dim; ++j) mean[j] += points[i][j];
        }
      if (!count) continue;
      for (auto& m : mean) m /= static_cast<double>(count);
      for (std::size_t i = 0; i < n; ++i)
        if (label[i] == c)
          for (std::size_t j = 0; j < dim; ++j) total += (points[i][j] - mean[j]) * (points[i][j] - mean[j]);
    }
    best = std::min(best, total);
    std::size_t pos = 0;
    while (pos < n && ++label[pos] == k) label[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

Eigen::MatrixXd enumerate_theta(const std::vector<std::vector<int>>& docs, int vocab, const std::vector<double>& alpha,
                                double eta) {
  const int k = static_cast<int>(alpha.size());
  const double alpha_sum = std::accumulate(alpha.begin(), alpha.end(), 0.0);
  std::vector<std::pair<int, int>> tokens;  // (doc, word)
  for (std::size_t d = 0; d < docs.size(); ++d)
    for (int w : docs[d]) tokens.emplace_back(static_cast<int>(d), w);

  const std::size_t n = tokens.size();
  std::size_t states = 1;
  for (std::size_t i = 0; i < n; ++i) states *= static_cast<std::size_t>(k);

  std::vector<double> log_weight(states);
  std::vector<Eigen::MatrixXd> posterior_mean(states);
  for (std::size_t s = 0; s < states; ++s) {
    Eigen::MatrixXd ndk = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(docs.size()), k);
    Eigen::MatrixXd nkw = Eigen::MatrixXd::Zero(k, vocab);
    std::size_t code = s;
    for (const auto& [d, w] : tokens) {
      const int z = static_cast<int>(code % static_cast<std::size_t>(k));
      code /= static_cast<std::size_t>(k);
      ndk(d, z) += 1;
      nkw(z, w) += 1;
    }
    // p(z, w) up to a constant: Dirichlet-multinomial terms for both levels.
    double lw = 0.0;
    for (Eigen::Index d = 0; d < ndk.rows(); ++d)
      for (int t = 0; t < k; ++t) lw += std::lgamma(ndk(d, t) + alpha[static_cast<std::size_t>(t)]);
    for (int t = 0; t < k; ++t) {
      for (int w = 0; w < vocab; ++w) lw += std::lgamma(nkw(t, w) + eta);
      lw -= std::lgamma(nkw.row(t).sum() + vocab * eta);
    }
    log_weight[s] = lw;
    Eigen::MatrixXd m(ndk.rows(), k);
    for (Eigen::Index d = 0; d < ndk.rows(); ++d)
      for (int t = 0; t < k; ++t)
        m(d, t) = (ndk(d, t) + alpha[static_cast<std::size_t>(t)]) / (static_cast<double>(docs[static_cast<std::size_t>(d)].size()) + alpha_sum);
    posterior_mean[s] = std::move(m);
  }
  const double top = *std::max_element(log_weight.begin(), log_weight.end());
  double z = 0.0;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(docs.size()), k);
  for (std::size_t s = 0; s < states; ++s) {
    const double w = std::exp(log_weight[s] - top);
    z += w;
    out += w * posterior_mean[s];
  }
  return out / z;
}

double log_likelihood(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& theta, const viralens::DocTermMatrix& corpus) {
  double ll = 0.0;
  for (std::size_t d = 0; d < corpus.num_docs(); ++d)
    for (std::size_t w = 0; w < corpus.num_words(); ++w)
      for (std::uint32_t c = 0; c < corpus.count(d, w); ++c) {
        double p = 0.0;
        for (Eigen::Index t = 0; t < phi.rows(); ++t) p += theta(static_cast<Eigen::Index>(d), t) * phi(t, static_cast<Eigen::Index>(w));
        ll += std::log(p);
      }
  return ll;
}

namespace {

std::vector<double> dirichlet(std::mt19937_64& gen, std::size_t n, double concentration) {
  std::gamma_distribution<double> g(concentration, 1.0);
  std::vector<double> out(n);
  double sum = 0.0;
  do {
    sum = 0.0;
    for (auto& x : out) sum += (x = g(gen));
  } while (sum <= 0.0);
  for (auto& x : out) x /= sum;
  return out;
}

}  // namespace

SyntheticLda generate_lda(int k, int vocab, int docs, int doc_length, double alpha, double topic_concentration,
                          std::uint32_t seed) {
  std::mt19937_64 gen(seed);
  Eigen::MatrixXd phi(k, vocab);
  for (int t = 0; t < k; ++t) {
    const auto row = dirichlet(gen, static_cast<std::size_t>(vocab), topic_concentration);
    for (int w = 0; w < vocab; ++w) phi(t, w) = row[static_cast<std::size_t>(w)];
  }
  Eigen::MatrixXd theta(docs, k);
  std::vector<std::string> ids, words;
  std::vector<std::vector<viralens::TermCount>> rows;
  for (int w = 0; w < vocab; ++w) words.push_back("w" + std::to_string(w));
  for (int d = 0; d < docs; ++d) {
    const auto mix = dirichlet(gen, static_cast<std::size_t>(k), alpha);
    for (int t = 0; t < k; ++t) theta(d, t) = mix[static_cast<std::size_t>(t)];
    std::discrete_distribution<int> pick_topic(mix.begin(), mix.end());
    std::vector<std::uint32_t> counts(static_cast<std::size_t>(vocab), 0);
    for (int n = 0; n < doc_length; ++n) {
      const int t = pick_topic(gen);
      // phi is column-major, so copy the row out.
      std::vector<double> row(phi.row(t).begin(), phi.row(t).end());
      std::discrete_distribution<int> pw(row.begin(), row.end());
      ++counts[static_cast<std::size_t>(pw(gen))];
    }
    std::vector<viralens::TermCount> r;
    for (int w = 0; w < vocab; ++w)
      if (counts[static_cast<std::size_t>(w)]) r.push_back({static_cast<std::uint32_t>(w), counts[static_cast<std::size_t>(w)]});
    ids.push_back("d" + std::to_string(d));
    rows.push_back(std::move(r));
  }
  return {phi, theta, viralens::DocTermMatrix(std::move(ids), std::move(words), std::move(rows))};
}

double best_permutation_tv(const Eigen::MatrixXd& recovered, const Eigen::MatrixXd& truth) {
  std::vector<int> perm(static_cast<std::size_t>(truth.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (Eigen::Index t = 0; t < truth.rows(); ++t)
      total += 0.5 * (recovered.row(perm[static_cast<std::size_t>(t)]) - truth.row(t)).cwiseAbs().sum();
    best = std::min(best, total / static_cast<double>(truth.rows()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace oracle

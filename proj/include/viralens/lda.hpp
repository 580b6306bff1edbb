#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "viralens/corpus.hpp"
#include "viralens/rng.hpp"

namespace viralens {

struct LdaHyperparams {
  int k = 12;
  /// Document-topic concentration: empty -> symmetric 50/K, one value ->
  /// symmetric, K values -> per-topic.
  std::vector<double> alpha;
  double eta = 0.1;
  int sweeps = 1000;
  int burn_in = 200;
  std::uint64_t seed = 42;

  void validate() const;
  /// Alpha expanded to K entries.
  std::vector<double> alpha_vector() const;
};

struct LdaModel {
  int k = 0;
  std::vector<double> alpha;  // K entries
  double eta = 0.0;
  Eigen::MatrixXd phi;        // K x V, rows sum to 1
  std::vector<std::string> vocabulary;
  std::vector<double> ll_trace;  // point-estimate log-likelihood per sweep

  std::size_t num_words() const noexcept { return static_cast<std::size_t>(phi.cols()); }
  void validate() const;
};

/// Collapsed Gibbs state over one corpus. Documents are swept in doc-id
/// order and every document draws from its own stream keyed by its id, so
/// permuting the rows of the input permutes the results and nothing else.
class GibbsSampler {
 public:
  GibbsSampler(const DocTermMatrix& corpus, const LdaHyperparams& hp);

  void sweep();
  int sweeps_done() const noexcept { return sweeps_done_; }

  std::size_t num_docs() const noexcept { return doc_topic_.size(); }
  int num_topics() const noexcept { return k_; }
  std::span<const std::uint32_t> doc_topic(std::size_t d) const { return doc_topic_[d]; }
  std::uint32_t topic_word(int k, std::size_t w) const { return topic_word_[static_cast<std::size_t>(k) * v_ + w]; }
  std::uint64_t topic_total(int k) const { return topic_total_[static_cast<std::size_t>(k)]; }
  std::uint64_t total_tokens() const noexcept { return total_tokens_; }
  std::uint64_t doc_length(std::size_t d) const { return tokens_[d].size(); }
  /// Rows that hold no tokens; they never enter the count tables.
  const std::vector<std::size_t>& skipped_docs() const noexcept { return skipped_; }

  /// Point-estimate log-likelihood of the current assignment.
  double current_log_likelihood() const;

  /// Running sums of the count tables, for posterior averaging.
  void accumulate(std::vector<double>& doc_topic_sum, std::vector<double>& topic_word_sum) const;

 private:
  const DocTermMatrix& corpus_;
  int k_;
  std::size_t v_;
  std::vector<double> alpha_;
  double alpha_sum_;
  double eta_;
  std::vector<std::vector<std::uint32_t>> tokens_;  // word per token
  std::vector<std::vector<std::uint32_t>> z_;       // topic per token
  std::vector<std::vector<std::uint32_t>> doc_topic_;
  std::vector<std::uint32_t> topic_word_;
  std::vector<std::uint64_t> topic_total_;
  std::vector<std::size_t> order_;
  std::vector<Rng> rngs_;
  std::vector<std::size_t> skipped_;
  std::vector<double> prob_;
  std::uint64_t total_tokens_ = 0;
  int sweeps_done_ = 0;
};

struct LdaFit {
  LdaModel model;
  Eigen::MatrixXd theta;  // M x K; empty rows get the prior mean
  double log_likelihood = 0.0;
  std::vector<std::size_t> skipped_docs;
};

using SweepObserver = std::function<void(const GibbsSampler&)>;

LdaFit gibbs_train(const DocTermMatrix& corpus, const LdaHyperparams& hp, const SweepObserver& observer = {});

/// Runs `restarts` chains with independent seeds and keeps the one with the
/// highest final log-likelihood. Restart r always uses the same seed, so
/// more restarts never lower the result.
LdaFit train_best_of(const DocTermMatrix& corpus, const LdaHyperparams& hp, int restarts);

/// Seed of restart `r` for topic count `k` under a base seed.
std::uint64_t restart_seed(std::uint64_t base, int k, int r);

/// Sum over tokens of log(sum_k theta[d,k] * phi[k,w]).
double log_likelihood(const LdaModel& model, const Eigen::MatrixXd& theta, const DocTermMatrix& corpus);

struct KSelectionRow {
  int k = 0;
  double best_log_likelihood = 0.0;
  std::vector<double> restart_log_likelihoods;
};

struct KSelection {
  int best_k = 0;
  std::vector<KSelectionRow> table;
};

KSelection select_k(const DocTermMatrix& corpus, const std::vector<int>& k_candidates, int restarts,
                    const LdaHyperparams& templ);

struct FoldInOptions {
  int sweeps = 200;
  int burn_in = 50;
};

struct FoldInResult {
  std::vector<double> theta;
  std::uint64_t dropped_tokens = 0;  // words outside the model vocabulary
};

/// Samples topic assignments for one unseen document with phi held fixed.
FoldInResult fold_in(const LdaModel& model, std::span<const TermCount> doc, std::uint64_t seed,
                     const FoldInOptions& options = {});

}  // namespace viralens

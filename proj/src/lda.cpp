#include "viralens/lda.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "viralens/error.hpp"
#include "parallel.hpp"

namespace viralens {

void LdaHyperparams::validate() const {
  if (k < 1) fail(ErrorKind::Argument, "K must be >= 1 (got " + std::to_string(k) + ")");
  if (!alpha.empty() && alpha.size() != 1 && alpha.size() != static_cast<std::size_t>(k))
    fail(ErrorKind::Argument, "alpha must have 1 or K entries");
  for (double a : alpha)
    if (!(a > 0.0) || !std::isfinite(a)) fail(ErrorKind::Argument, "alpha must be > 0");
  if (!(eta > 0.0) || !std::isfinite(eta)) fail(ErrorKind::Argument, "eta must be > 0");
  if (burn_in < 0) fail(ErrorKind::Argument, "burn_in must be >= 0");
  if (sweeps <= burn_in) fail(ErrorKind::Argument, "sweeps must exceed burn_in");
}

std::vector<double> LdaHyperparams::alpha_vector() const {
  const auto n = static_cast<std::size_t>(k);
  if (alpha.empty()) return std::vector<double>(n, 50.0 / k);
  if (alpha.size() == 1) return std::vector<double>(n, alpha.front());
  return alpha;
}

void LdaModel::validate() const {
  if (k < 1 || phi.rows() != k) fail(ErrorKind::Validation, "topic-word matrix must have K rows");
  if (alpha.size() != static_cast<std::size_t>(k)) fail(ErrorKind::Validation, "alpha must have K entries");
  if (!(eta > 0.0)) fail(ErrorKind::Validation, "eta must be > 0");
  if (vocabulary.size() != num_words())
    fail(ErrorKind::Validation, "vocabulary length " + std::to_string(vocabulary.size()) +
                                    " does not match topic-word column count " + std::to_string(num_words()));
  for (Eigen::Index r = 0; r < phi.rows(); ++r) {
    if ((phi.row(r).array() <= 0.0).any()) fail(ErrorKind::Validation, "topic-word entries must be positive");
    if (std::abs(phi.row(r).sum() - 1.0) > 1e-9) fail(ErrorKind::Validation, "topic-word rows must sum to 1");
  }
}

// ---------------------------------------------------------------------------

GibbsSampler::GibbsSampler(const DocTermMatrix& corpus, const LdaHyperparams& hp)
    : corpus_(corpus),
      k_((hp.validate(), hp.k)),
      v_(corpus.num_words()),
      alpha_(hp.alpha_vector()),
      alpha_sum_(std::accumulate(alpha_.begin(), alpha_.end(), 0.0)),
      eta_(hp.eta) {
  const std::size_t m = corpus.num_docs();
  const auto kk = static_cast<std::size_t>(k_);
  tokens_.resize(m);
  z_.resize(m);
  doc_topic_.assign(m, std::vector<std::uint32_t>(kk, 0));
  topic_word_.assign(kk * v_, 0);
  topic_total_.assign(kk, 0);
  prob_.resize(kk);

  order_.resize(m);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t a, std::size_t b) { return corpus.doc_ids()[a] < corpus.doc_ids()[b]; });

  const Rng root(hp.seed);
  rngs_.reserve(m);
  for (std::size_t d = 0; d < m; ++d) rngs_.push_back(root.split(corpus.doc_ids()[d]));

  for (std::size_t d = 0; d < m; ++d) {
    for (const TermCount& tc : corpus.row(d)) tokens_[d].insert(tokens_[d].end(), tc.count, tc.word);
    if (tokens_[d].empty()) skipped_.push_back(d);
    total_tokens_ += tokens_[d].size();
  }
  if (total_tokens_ == 0) fail(ErrorKind::Argument, "corpus has no tokens after dropping empty documents");

  for (std::size_t d : order_) {
    Rng& rng = rngs_[d];
    z_[d].resize(tokens_[d].size());
    for (std::size_t i = 0; i < tokens_[d].size(); ++i) {
      const auto t = static_cast<std::uint32_t>(rng.below(kk));
      z_[d][i] = t;
      ++doc_topic_[d][t];
      ++topic_word_[t * v_ + tokens_[d][i]];
      ++topic_total_[t];
    }
  }
}

void GibbsSampler::sweep() {
  const double v_eta = static_cast<double>(v_) * eta_;
  for (std::size_t d : order_) {
    Rng& rng = rngs_[d];
    auto& nd = doc_topic_[d];
    for (std::size_t i = 0; i < tokens_[d].size(); ++i) {
      const std::uint32_t w = tokens_[d][i];
      std::uint32_t t = z_[d][i];
      --nd[t];
      --topic_word_[t * v_ + w];
      --topic_total_[t];

      double total = 0.0;
      for (int k = 0; k < k_; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        total += (nd[kk] + alpha_[kk]) * (topic_word_[kk * v_ + w] + eta_) / (topic_total_[kk] + v_eta);
        prob_[kk] = total;
      }
      const double u = rng.uniform() * total;
      t = static_cast<std::uint32_t>(k_ - 1);
      for (int k = 0; k < k_; ++k) {
        if (u < prob_[static_cast<std::size_t>(k)]) {
          t = static_cast<std::uint32_t>(k);
          break;
        }
      }

      z_[d][i] = t;
      ++nd[t];
      ++topic_word_[t * v_ + w];
      ++topic_total_[t];
    }
  }
  ++sweeps_done_;
}

double GibbsSampler::current_log_likelihood() const {
  const double v_eta = static_cast<double>(v_) * eta_;
  double ll = 0.0;
  for (std::size_t d = 0; d < tokens_.size(); ++d) {
    const double nd = static_cast<double>(tokens_[d].size());
    if (nd == 0.0) continue;
    for (const TermCount& tc : corpus_.row(d)) {
      double p = 0.0;
      for (int k = 0; k < k_; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        const double theta = (doc_topic_[d][kk] + alpha_[kk]) / (nd + alpha_sum_);
        const double phi = (topic_word_[kk * v_ + tc.word] + eta_) / (topic_total_[kk] + v_eta);
        p += theta * phi;
      }
      ll += tc.count * std::log(p);
    }
  }
  return ll;
}

void GibbsSampler::accumulate(std::vector<double>& doc_topic_sum, std::vector<double>& topic_word_sum) const {
  const auto kk = static_cast<std::size_t>(k_);
  for (std::size_t d = 0; d < doc_topic_.size(); ++d)
    for (std::size_t k = 0; k < kk; ++k) doc_topic_sum[d * kk + k] += doc_topic_[d][k];
  for (std::size_t i = 0; i < topic_word_.size(); ++i) topic_word_sum[i] += topic_word_[i];
}

// ---------------------------------------------------------------------------

LdaFit gibbs_train(const DocTermMatrix& corpus, const LdaHyperparams& hp, const SweepObserver& observer) {
  hp.validate();
  GibbsSampler sampler(corpus, hp);
  const std::size_t m = corpus.num_docs(), v = corpus.num_words();
  const auto kk = static_cast<std::size_t>(hp.k);

  std::vector<double> doc_topic_sum(m * kk, 0.0), topic_word_sum(kk * v, 0.0);
  LdaFit fit;
  fit.model.ll_trace.reserve(static_cast<std::size_t>(hp.sweeps));
  for (int s = 1; s <= hp.sweeps; ++s) {
    sampler.sweep();
    fit.model.ll_trace.push_back(sampler.current_log_likelihood());
    if (s > hp.burn_in) sampler.accumulate(doc_topic_sum, topic_word_sum);
    if (observer) observer(sampler);
  }
  const double samples = hp.sweeps - hp.burn_in;

  fit.model.k = hp.k;
  fit.model.alpha = hp.alpha_vector();
  fit.model.eta = hp.eta;
  fit.model.vocabulary = corpus.vocabulary();
  fit.model.phi.resize(hp.k, static_cast<Eigen::Index>(v));
  for (std::size_t k = 0; k < kk; ++k) {
    double row_total = 0.0;
    for (std::size_t w = 0; w < v; ++w) row_total += topic_word_sum[k * v + w] / samples;
    for (std::size_t w = 0; w < v; ++w)
      fit.model.phi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(w)) =
          (topic_word_sum[k * v + w] / samples + hp.eta) / (row_total + static_cast<double>(v) * hp.eta);
  }

  const double alpha_sum = std::accumulate(fit.model.alpha.begin(), fit.model.alpha.end(), 0.0);
  fit.theta.resize(static_cast<Eigen::Index>(m), hp.k);
  for (std::size_t d = 0; d < m; ++d) {
    const double nd = static_cast<double>(sampler.doc_length(d));
    for (std::size_t k = 0; k < kk; ++k)
      fit.theta(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k)) =
          (doc_topic_sum[d * kk + k] / samples + fit.model.alpha[k]) / (nd + alpha_sum);
  }
  fit.skipped_docs = sampler.skipped_docs();
  fit.log_likelihood = log_likelihood(fit.model, fit.theta, corpus);
  return fit;
}

std::uint64_t restart_seed(std::uint64_t base, int k, int r) {
  return Rng(base).split(static_cast<std::uint64_t>(k)).split(static_cast<std::uint64_t>(r)).seed();
}

using detail::parallel_for;

LdaFit train_best_of(const DocTermMatrix& corpus, const LdaHyperparams& hp, int restarts) {
  if (restarts < 1) fail(ErrorKind::Argument, "restarts must be >= 1");
  hp.validate();
  std::vector<LdaFit> fits(static_cast<std::size_t>(restarts));
  parallel_for(fits.size(), [&](std::size_t r) {
    LdaHyperparams run = hp;
    run.seed = restart_seed(hp.seed, hp.k, static_cast<int>(r));
    fits[r] = gibbs_train(corpus, run);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < fits.size(); ++r)
    if (fits[r].log_likelihood > fits[best].log_likelihood) best = r;
  return std::move(fits[best]);
}

double log_likelihood(const LdaModel& model, const Eigen::MatrixXd& theta, const DocTermMatrix& corpus) {
  if (theta.rows() != static_cast<Eigen::Index>(corpus.num_docs()) || theta.cols() != model.phi.rows())
    fail(ErrorKind::Argument, "log_likelihood: theta must be documents x K");
  if (model.phi.cols() != static_cast<Eigen::Index>(corpus.num_words()))
    fail(ErrorKind::Argument, "log_likelihood: vocabulary size differs between model and corpus");
  for (Eigen::Index d = 0; d < theta.rows(); ++d)
    if (std::abs(theta.row(d).sum() - 1.0) > 1e-6) fail(ErrorKind::Argument, "log_likelihood: theta rows must sum to 1");

  double ll = 0.0;
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    const auto dd = static_cast<Eigen::Index>(d);
    for (const TermCount& tc : corpus.row(d)) ll += tc.count * std::log(theta.row(dd).dot(model.phi.col(tc.word)));
  }
  return ll;
}

KSelection select_k(const DocTermMatrix& corpus, const std::vector<int>& k_candidates, int restarts,
                    const LdaHyperparams& templ) {
  if (k_candidates.empty()) fail(ErrorKind::Argument, "select_k: no K candidates");
  if (restarts < 1) fail(ErrorKind::Argument, "select_k: restarts must be >= 1");

  std::vector<LdaHyperparams> grid;
  for (int k : k_candidates) {
    LdaHyperparams hp = templ;
    hp.k = k;
    if (hp.alpha.size() > 1 && hp.alpha.size() != static_cast<std::size_t>(k))
      fail(ErrorKind::Argument, "select_k: per-topic alpha does not fit K = " + std::to_string(k));
    hp.validate();
    grid.push_back(std::move(hp));
  }

  const auto r_count = static_cast<std::size_t>(restarts);
  std::vector<double> lls(grid.size() * r_count);
  parallel_for(lls.size(), [&](std::size_t i) {
    LdaHyperparams run = grid[i / r_count];
    run.seed = restart_seed(templ.seed, run.k, static_cast<int>(i % r_count));
    lls[i] = gibbs_train(corpus, run).log_likelihood;
  });

  KSelection out;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    KSelectionRow row{grid[g].k, 0.0, {lls.begin() + static_cast<std::ptrdiff_t>(g * r_count),
                                       lls.begin() + static_cast<std::ptrdiff_t>((g + 1) * r_count)}};
    row.best_log_likelihood = *std::max_element(row.restart_log_likelihoods.begin(), row.restart_log_likelihoods.end());
    out.table.push_back(std::move(row));
  }
  const KSelectionRow* best = &out.table.front();
  for (const auto& row : out.table) {
    if (row.best_log_likelihood > best->best_log_likelihood ||
        (row.best_log_likelihood == best->best_log_likelihood && row.k < best->k))
      best = &row;
  }
  out.best_k = best->k;
  return out;
}

FoldInResult fold_in(const LdaModel& model, std::span<const TermCount> doc, std::uint64_t seed,
                     const FoldInOptions& options) {
  if (options.burn_in < 0 || options.sweeps <= options.burn_in)
    fail(ErrorKind::Argument, "fold_in: sweeps must exceed burn_in >= 0");
  const auto kk = static_cast<std::size_t>(model.k);
  if (model.alpha.size() != kk || model.phi.rows() != model.k)
    fail(ErrorKind::Argument, "fold_in: model is inconsistent");
  const double alpha_sum = std::accumulate(model.alpha.begin(), model.alpha.end(), 0.0);

  FoldInResult out;
  std::vector<std::uint32_t> tokens;
  for (const TermCount& tc : doc) {
    if (tc.word >= model.num_words()) {
      out.dropped_tokens += tc.count;
      continue;
    }
    tokens.insert(tokens.end(), tc.count, tc.word);
  }

  out.theta.resize(kk);
  if (tokens.empty()) {
    for (std::size_t k = 0; k < kk; ++k) out.theta[k] = model.alpha[k] / alpha_sum;
    return out;
  }

  Rng rng(seed);
  std::vector<std::uint32_t> z(tokens.size());
  std::vector<double> nd(kk, 0.0), sum(kk, 0.0), prob(kk);
  for (auto& t : z) {
    t = static_cast<std::uint32_t>(rng.below(kk));
    ++nd[t];
  }
  for (int s = 1; s <= options.sweeps; ++s) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      --nd[z[i]];
      double total = 0.0;
      for (std::size_t k = 0; k < kk; ++k) {
        total += (nd[k] + model.alpha[k]) * model.phi(static_cast<Eigen::Index>(k), tokens[i]);
        prob[k] = total;
      }
      const double u = rng.uniform() * total;
      std::size_t t = kk - 1;
      for (std::size_t k = 0; k < kk; ++k) {
        if (u < prob[k]) {
          t = k;
          break;
        }
      }
      z[i] = static_cast<std::uint32_t>(t);
      ++nd[t];
    }
    if (s > options.burn_in)
      for (std::size_t k = 0; k < kk; ++k) sum[k] += nd[k];
  }
  const double samples = options.sweeps - options.burn_in;
  const double n = static_cast<double>(tokens.size());
  for (std::size_t k = 0; k < kk; ++k) out.theta[k] = (sum[k] / samples + model.alpha[k]) / (n + alpha_sum);
  return out;
}

}  // namespace viralens

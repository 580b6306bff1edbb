#include "viralens/dss.hpp"

#include <algorithm>
#include <cmath>

#include "viralens/error.hpp"
#include "viralens/rng.hpp"

namespace viralens {

ViralSet derive_viral_set(const ClusterStats& stats, const PairwiseMatrix& tests,
                          const std::optional<std::vector<std::uint32_t>>& override_clusters) {
  ViralSet out;
  if (override_clusters) {
    out.rule = "explicit";
    out.clusters = *override_clusters;
    for (std::uint32_t c : out.clusters)
      if (c >= stats.size()) fail(ErrorKind::Argument, "viral override names cluster " + std::to_string(c) + " out of range");
  } else {
    for (std::size_t i = 0; i < tests.size(); ++i) {
      for (std::size_t j = i + 1; j < tests.size(); ++j) {
        const auto& t = tests.at(i, j);
        if (!t || !t->significant) continue;
        out.clusters.push_back(static_cast<std::uint32_t>(t->t_stat > 0 ? i : j));
      }
    }
  }
  std::sort(out.clusters.begin(), out.clusters.end());
  out.clusters.erase(std::unique(out.clusters.begin(), out.clusters.end()), out.clusters.end());
  return out;
}

double expected_activity(std::span<const double> theta, const ClusterStats& stats) {
  if (theta.size() != stats.size()) fail(ErrorKind::Argument, "expected_activity: theta and cluster stats differ in size");
  double total = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (theta[k] <= 1e-12) continue;
    if (!stats[k].mean)
      fail(ErrorKind::Compute, "expected_activity: cluster " + std::to_string(k) + " has weight " +
                                   std::to_string(theta[k]) + " but no defined mean");
    total += theta[k] * *stats[k].mean;
  }
  return total;
}

ScoreReport score_document(const ModelArchive& archive, std::span<const TermCount> doc) {
  ScoreReport r;
  FoldInResult fit;
  try {
    fit = fold_in(archive.lda, doc, archive.fold_in_seed, archive.fold_in);
  } catch (const Error& e) {
    throw ScoringError(e.kind(), "fold_in", e.what());
  }
  r.theta = std::move(fit.theta);
  r.dropped_tokens = fit.dropped_tokens;
  try {
    r.expected_activity = expected_activity(r.theta, archive.cluster_stats);
  } catch (const Error& e) {
    throw ScoringError(e.kind(), "expected_activity", e.what());
  }
  const std::size_t k = r.theta.size();
  r.contributions.resize(k);
  r.viral.resize(k);
  r.labels = archive.labels;
  for (std::size_t c = 0; c < k; ++c) {
    const auto& mean = archive.cluster_stats[c].mean;
    r.contributions[c] = mean ? r.theta[c] * *mean : 0.0;
    r.viral[c] = archive.viral.contains(static_cast<std::uint32_t>(c));
    if (r.viral[c]) r.viral_probability += r.theta[c];
  }
  r.viral_probability = std::clamp(r.viral_probability, 0.0, 1.0);
  return r;
}

ScoreReport score(const ModelArchive& archive, std::span<const std::uint8_t> image_bytes) {
  auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const ScoringError&) {
      throw;
    } catch (const Error& e) {
      throw ScoringError(e.kind(), name, e.what());
    }
  };

  const PixelGrid grid = stage("decode", [&] { return decode_image(image_bytes); });
  const VisualDescriptor desc = stage("extract", [&] {
    return extract_visual_descriptor(grid, Rng(archive.fold_in_seed).split("extract").seed(), archive.extraction);
  });
  const VisualBag bag = stage("quantize", [&] { return quantize_to_visual_words(desc, archive.quantization); });

  // Visual words occupy the first 6*B archive columns.
  if (archive.lda.num_words() < bag.counts.size())
    throw ScoringError(ErrorKind::Validation, "quantize", "archive vocabulary is smaller than the visual vocabulary");
  std::vector<TermCount> doc;
  for (std::uint32_t w = 0; w < bag.counts.size(); ++w)
    if (bag.counts[w]) doc.push_back({w, bag.counts[w]});

  ScoreReport r = score_document(archive, doc);
  r.descriptor = desc;
  return r;
}

CompareReport compare_reports(ScoreReport a, ScoreReport b) {
  if (a.theta.size() != b.theta.size()) fail(ErrorKind::Argument, "compare: reports come from different models");
  CompareReport out;
  out.delta_theta.resize(a.theta.size());
  for (std::size_t k = 0; k < a.theta.size(); ++k) out.delta_theta[k] = b.theta[k] - a.theta[k];
  out.delta_expected_activity = b.expected_activity - a.expected_activity;
  out.delta_viral_probability = b.viral_probability - a.viral_probability;
  out.a = std::move(a);
  out.b = std::move(b);
  return out;
}

CompareReport compare(const ModelArchive& archive, std::span<const std::uint8_t> image_a,
                      std::span<const std::uint8_t> image_b) {
  auto tagged = [&](std::span<const std::uint8_t> bytes, const char* variant) {
    try {
      return score(archive, bytes);
    } catch (const ScoringError& e) {
      throw ScoringError(e.kind(), e.stage(), e.detail(), variant);
    }
  };
  ScoreReport a = tagged(image_a, "a");
  ScoreReport b = tagged(image_b, "b");
  return compare_reports(std::move(a), std::move(b));
}

}  // namespace viralens

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "viralens/archive.hpp"
#include "viralens/error.hpp"
#include "viralens/vision.hpp"

namespace viralens {

/// Failure inside the scoring pipeline, tagged with the stage that failed
/// and, for comparisons, the variant ("a" or "b").
class ScoringError : public Error {
 public:
  ScoringError(ErrorKind kind, std::string stage, std::string detail, std::string variant = {})
      : Error(kind, (variant.empty() ? "" : "variant " + variant + ": ") + stage + ": " + detail),
        stage_(std::move(stage)),
        detail_(std::move(detail)),
        variant_(std::move(variant)) {}

  const std::string& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::string& variant() const noexcept { return variant_; }

 private:
  std::string stage_;
  std::string detail_;
  std::string variant_;
};

/// Cluster k is viral when at least one significant comparison has k as the
/// cluster with the larger mean. An explicit override replaces the rule.
ViralSet derive_viral_set(const ClusterStats& stats, const PairwiseMatrix& tests,
                          const std::optional<std::vector<std::uint32_t>>& override_clusters = std::nullopt);

/// sum_k theta_k * mean_k. Throws Error{Compute} naming the cluster when
/// weight above 1e-12 falls on a cluster without a defined mean.
double expected_activity(std::span<const double> theta, const ClusterStats& stats);

struct ScoreReport {
  std::vector<double> theta;
  double expected_activity = 0.0;
  double viral_probability = 0.0;
  std::vector<double> contributions;  // theta_k * mean_k (0 where undefined)
  std::vector<std::string> labels;
  std::vector<bool> viral;
  std::uint64_t dropped_tokens = 0;
  std::optional<VisualDescriptor> descriptor;
};

/// Scores a document already expressed as counts over the archive vocabulary.
ScoreReport score_document(const ModelArchive& archive, std::span<const TermCount> doc);
ScoreReport score(const ModelArchive& archive, std::span<const std::uint8_t> image_bytes);

struct CompareReport {
  ScoreReport a;
  ScoreReport b;
  std::vector<double> delta_theta;  // b - a
  double delta_expected_activity = 0.0;
  double delta_viral_probability = 0.0;
};

CompareReport compare(const ModelArchive& archive, std::span<const std::uint8_t> image_a,
                      std::span<const std::uint8_t> image_b);
CompareReport compare_reports(ScoreReport a, ScoreReport b);

}  // namespace viralens

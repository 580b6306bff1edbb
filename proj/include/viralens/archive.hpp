#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "viralens/analytics.hpp"
#include "viralens/lda.hpp"
#include "viralens/vision.hpp"

namespace viralens {

inline constexpr int kArchiveFormatVersion = 1;

struct ViralSet {
  std::vector<std::uint32_t> clusters;  // sorted, unique
  /// "significant-positive" (derived from the pairwise tests) or "explicit".
  std::string rule = "significant-positive";
  double confidence = 0.95;

  bool contains(std::uint32_t k) const;
};

/// A trained model plus everything needed to score new designs with it.
struct ModelArchive {
  int format_version = kArchiveFormatVersion;
  QuantizationConfig quantization;
  ExtractionOptions extraction;
  LdaModel lda;  // lda.vocabulary is the archive vocabulary
  std::uint64_t fold_in_seed = 42;
  FoldInOptions fold_in;
  ClusterStats cluster_stats;
  ViralSet viral;
  std::vector<std::string> labels;

  void validate() const;
};

void save_archive(const ModelArchive& archive, const std::string& path);
ModelArchive load_archive(const std::string& path);

std::string archive_to_string(const ModelArchive& archive);
ModelArchive archive_from_string(const std::string& text);

/// Short stable identifier derived from the archive contents.
std::string model_version(const ModelArchive& archive);

}  // namespace viralens

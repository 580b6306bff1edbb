#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "viralens/archive.hpp"
#include "viralens/corpus.hpp"

namespace viralens {

struct DocumentFeatures {
  std::string doc_id;
  VisualDescriptor descriptor;
  VisualBag bag;
};

/// Seed used to extract one document's descriptor.
std::uint64_t document_seed(std::uint64_t seed, const std::string& doc_id);

/// Decodes and summarizes every manifest image. Relative image paths are
/// resolved against base_dir.
std::vector<DocumentFeatures> extract_features(const std::vector<ManifestRecord>& records, const std::string& base_dir,
                                               const QuantizationConfig& quantization,
                                               const ExtractionOptions& extraction, std::uint64_t seed);

struct IngestOptions {
  QuantizationConfig quantization;
  ExtractionOptions extraction;
  /// When set, OCR sidecars named in the manifest are filtered through it.
  std::optional<std::string> dictionary_path;
  std::uint64_t seed = 42;
};

struct IngestResult {
  CorpusFile corpus;
  std::vector<std::string> warnings;
};

IngestResult ingest(const std::string& manifest_path, const IngestOptions& options);

struct TrainOptions {
  LdaHyperparams hp;
  int restarts = 1;
  double confidence = 0.95;
  std::optional<std::vector<std::uint32_t>> viral_override;
  std::size_t label_terms = 3;
};

struct TrainedModel {
  ModelArchive archive;
  LdaFit fit;
  /// Cluster of each trained document; empty documents are left out.
  std::vector<std::optional<std::uint32_t>> assignments;
  PairwiseMatrix tests;
};

TrainedModel train_model(const CorpusFile& corpus, const TrainOptions& options);

}  // namespace viralens

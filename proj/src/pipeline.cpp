#include "viralens/pipeline.hpp"

#include <algorithm>
#include <filesystem>

#include "viralens/dss.hpp"
#include "viralens/error.hpp"
#include "viralens/rng.hpp"
#include "parallel.hpp"

namespace viralens {

namespace fs = std::filesystem;

std::uint64_t document_seed(std::uint64_t seed, const std::string& doc_id) {
  return Rng(seed).split("features").split(doc_id).seed();
}

namespace {

std::string resolve(const std::string& base_dir, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() || base_dir.empty() ? p.string() : (fs::path(base_dir) / p).string();
}

}  // namespace

std::vector<DocumentFeatures> extract_features(const std::vector<ManifestRecord>& records, const std::string& base_dir,
                                               const QuantizationConfig& quantization,
                                               const ExtractionOptions& extraction, std::uint64_t seed) {
  quantization.validate();
  std::vector<DocumentFeatures> out(records.size());
  detail::parallel_for(records.size(), [&](std::size_t i) {
    const auto& rec = records[i];
    const PixelGrid grid = read_image_file(resolve(base_dir, rec.image_path));
    out[i].doc_id = rec.id;
    out[i].descriptor = extract_visual_descriptor(grid, document_seed(seed, rec.id), extraction);
    out[i].bag = quantize_to_visual_words(out[i].descriptor, quantization);
  });
  return out;
}

IngestResult ingest(const std::string& manifest_path, const IngestOptions& options) {
  std::vector<ManifestRecord> records = load_manifest(manifest_path);
  if (records.empty()) fail(ErrorKind::Validation, "manifest has no documents: " + manifest_path);
  const std::string base_dir = fs::path(manifest_path).parent_path().string();

  const auto features = extract_features(records, base_dir, options.quantization, options.extraction, options.seed);
  std::vector<KeyedVisualBag> visual;
  visual.reserve(features.size());
  for (const auto& f : features) visual.push_back({f.doc_id, f.bag});

  std::vector<std::string> warnings;
  std::optional<std::vector<KeyedTextBag>> text;
  if (options.dictionary_path) {
    const Dictionary dict = Dictionary::load(*options.dictionary_path);
    text.emplace();
    for (const auto& rec : records) {
      std::vector<std::string> tokens;
      if (rec.token_sidecar) tokens = load_sidecar(resolve(base_dir, *rec.token_sidecar)).tokens;
      text->push_back({rec.id, build_text_bag(dictionary_filter(tokens, dict))});
    }
  } else if (std::any_of(records.begin(), records.end(), [](const auto& r) { return r.token_sidecar.has_value(); })) {
    warnings.push_back("manifest names token sidecars but no dictionary was given; text features skipped");
  }

  Assembly assembly = text ? assemble_doc_term(visual, std::span<const KeyedTextBag>(*text)) : assemble_doc_term(visual);
  warnings.insert(warnings.end(), assembly.warnings.begin(), assembly.warnings.end());
  return {CorpusFile{options.quantization, std::move(records), std::move(assembly.matrix)}, std::move(warnings)};
}

TrainedModel train_model(const CorpusFile& corpus, const TrainOptions& options) {
  const DocTermMatrix& m = corpus.matrix;
  if (corpus.records.size() != m.num_docs()) fail(ErrorKind::Validation, "corpus records are not aligned with rows");

  TrainedModel out;
  out.fit = train_best_of(m, options.hp, options.restarts);
  const auto k = static_cast<std::size_t>(options.hp.k);

  const auto hard = cluster_assign(out.fit.theta);
  std::vector<std::uint32_t> assigned;
  std::vector<double> activity;
  std::vector<std::vector<std::string>> titles(k);
  out.assignments.resize(m.num_docs());
  for (std::size_t d = 0; d < m.num_docs(); ++d) {
    if (m.doc_length(d) == 0) continue;
    out.assignments[d] = hard[d];
    assigned.push_back(hard[d]);
    activity.push_back(static_cast<double>(corpus.records[d].total_shares()));
    titles[hard[d]].push_back(corpus.records[d].title);
  }

  ModelArchive& a = out.archive;
  a.quantization = corpus.quantization;
  a.lda = out.fit.model;
  a.fold_in_seed = Rng(options.hp.seed).split("fold_in").seed();
  a.cluster_stats = cluster_stats(assigned, activity, k);

  const auto clouds = word_cloud_terms(titles, options.label_terms);
  for (std::size_t c = 0; c < k; ++c) {
    std::string label;
    for (const auto& [term, n] : clouds[c]) label += (label.empty() ? "" : " ") + term;
    if (label.empty()) label = "cluster " + std::to_string(c + 1);
    a.labels.push_back(label);
    a.cluster_stats.clusters[c].label = label;
  }

  out.tests = pairwise_matrix(a.cluster_stats, options.confidence);
  a.viral = derive_viral_set(a.cluster_stats, out.tests, options.viral_override);
  a.viral.confidence = options.confidence;
  a.validate();
  return out;
}

}  // namespace viralens

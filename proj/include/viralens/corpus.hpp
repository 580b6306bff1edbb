#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "viralens/text.hpp"
#include "viralens/vision.hpp"

namespace viralens {

struct ManifestRecord {
  std::string id;
  std::string image_path;
  std::string title;
  std::uint64_t shares_facebook = 0;
  std::uint64_t shares_pinterest = 0;
  std::uint64_t shares_linkedin = 0;
  std::uint64_t shares_twitter = 0;
  std::optional<std::string> token_sidecar;

  /// The virality measure: sum over the four platforms.
  std::uint64_t total_shares() const noexcept {
    return shares_facebook + shares_pinterest + shares_linkedin + shares_twitter;
  }
};

/// Reads a manifest CSV with a header row naming the columns
/// id,image_path,title,shares_facebook,shares_pinterest,shares_linkedin,shares_twitter[,token_sidecar].
/// Column order is free; extra columns are ignored.
std::vector<ManifestRecord> load_manifest(const std::string& path);
std::vector<ManifestRecord> parse_manifest(const std::string& csv_text);

/// Splits one CSV record (RFC 4180 quoting) into fields.
std::vector<std::string> split_csv_line(const std::string& line);

struct TermCount {
  std::uint32_t word = 0;
  std::uint32_t count = 0;
  friend bool operator==(const TermCount&, const TermCount&) = default;
};

/// Sparse documents x vocabulary count matrix. Rows hold strictly
/// increasing word indices with positive counts.
class DocTermMatrix {
 public:
  DocTermMatrix(std::vector<std::string> doc_ids, std::vector<std::string> vocabulary,
                std::vector<std::vector<TermCount>> rows);

  std::size_t num_docs() const noexcept { return doc_ids_.size(); }
  std::size_t num_words() const noexcept { return vocabulary_.size(); }
  const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }
  const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }
  std::span<const TermCount> row(std::size_t d) const { return rows_.at(d); }
  const std::vector<std::vector<TermCount>>& rows() const noexcept { return rows_; }

  std::uint64_t doc_length(std::size_t d) const;
  std::uint64_t total_tokens() const;
  std::uint32_t count(std::size_t d, std::size_t w) const;
  /// Row-major dense copy as doubles.
  std::vector<double> dense() const;

  friend bool operator==(const DocTermMatrix&, const DocTermMatrix&) = default;

 private:
  std::vector<std::string> doc_ids_;
  std::vector<std::string> vocabulary_;
  std::vector<std::vector<TermCount>> rows_;
};

struct KeyedVisualBag {
  std::string doc_id;
  VisualBag bag;
};

struct KeyedTextBag {
  std::string doc_id;
  TextBag bag;
};

struct Assembly {
  DocTermMatrix matrix;
  std::vector<std::string> warnings;
  /// Row indices whose token total is zero.
  std::vector<std::size_t> empty_rows;
};

/// Column order: the visual vocabulary, then text terms in first-seen order
/// (text bags visited in the order given). Rows follow visual_bags.
Assembly assemble_doc_term(std::span<const KeyedVisualBag> visual_bags,
                           std::optional<std::span<const KeyedTextBag>> text_bags = std::nullopt);

/// Everything `ingest` produces and later stages consume.
struct CorpusFile {
  QuantizationConfig quantization;
  std::vector<ManifestRecord> records;  // aligned with matrix rows
  DocTermMatrix matrix;
};

void save_corpus(const CorpusFile& corpus, const std::string& path);
CorpusFile load_corpus(const std::string& path);

}  // namespace viralens

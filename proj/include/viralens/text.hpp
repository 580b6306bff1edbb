#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace viralens {

struct TokenSidecar {
  std::string doc_id;
  std::vector<std::string> tokens;
};

/// Lowercases and strips surrounding punctuation/whitespace. Returns an
/// empty string for tokens that are all punctuation.
std::string normalize_token(std::string_view raw);

/// One token per line; blank lines skipped. The doc id is taken from a
/// `<doc_id>.tokens.txt` file name, or the bare stem otherwise.
TokenSidecar load_sidecar(const std::string& path);

class Dictionary {
 public:
  explicit Dictionary(std::vector<std::string> words);

  static Dictionary load(const std::string& path);

  bool contains(std::string_view word) const { return words_.count(std::string(word)) != 0; }
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

std::vector<std::string> dictionary_filter(const std::vector<std::string>& tokens, const Dictionary& dict);

/// Term counts in first-seen order.
using TextBag = std::vector<std::pair<std::string, std::uint32_t>>;

TextBag build_text_bag(const std::vector<std::string>& tokens);

/// Append-only term -> column registry shared by every bag that feeds one
/// doc-term matrix. Lookups and appends are serialized.
class VocabularyRegistry {
 public:
  VocabularyRegistry() = default;
  explicit VocabularyRegistry(const std::vector<std::string>& initial);

  std::uint32_t intern(const std::string& term);
  /// Column of `term`, or -1 when unknown.
  std::int64_t find(const std::string& term) const;
  std::vector<std::string> terms() const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

}  // namespace viralens

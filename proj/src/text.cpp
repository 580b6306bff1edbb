#include "viralens/text.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>

#include "viralens/error.hpp"

namespace viralens {

namespace {

bool is_trim_char(unsigned char c) { return std::ispunct(c) || std::isspace(c); }

}  // namespace

std::string normalize_token(std::string_view raw) {
  std::size_t b = 0, e = raw.size();
  while (b < e && is_trim_char(static_cast<unsigned char>(raw[b]))) ++b;
  while (e > b && is_trim_char(static_cast<unsigned char>(raw[e - 1]))) --e;
  std::string out(raw.substr(b, e - b));
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

TokenSidecar load_sidecar(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open token sidecar: " + path);

  TokenSidecar out;
  std::string name = std::filesystem::path(path).filename().string();
  constexpr std::string_view suffix = ".tokens.txt";
  if (name.size() > suffix.size() && name.ends_with(suffix)) {
    out.doc_id = name.substr(0, name.size() - suffix.size());
  } else {
    out.doc_id = std::filesystem::path(path).stem().string();
  }

  std::string line;
  while (std::getline(in, line)) {
    std::string tok = normalize_token(line);
    if (!tok.empty()) out.tokens.push_back(std::move(tok));
  }
  return out;
}

Dictionary::Dictionary(std::vector<std::string> words) {
  for (auto& w : words) {
    if (w.empty()) continue;
    const bool bad = std::any_of(w.begin(), w.end(), [](unsigned char c) {
      return std::isspace(c) || std::isupper(c);
    });
    if (bad) fail(ErrorKind::Validation, "dictionary entry must be lowercase without whitespace: '" + w + "'");
    words_.insert(std::move(w));
  }
  if (words_.empty()) fail(ErrorKind::Validation, "dictionary is empty");
}

Dictionary Dictionary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open dictionary: " + path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    if (!line.empty()) words.push_back(line);
  }
  return Dictionary(std::move(words));
}

std::vector<std::string> dictionary_filter(const std::vector<std::string>& tokens, const Dictionary& dict) {
  std::vector<std::string> kept;
  std::copy_if(tokens.begin(), tokens.end(), std::back_inserter(kept),
               [&](const std::string& t) { return dict.contains(t); });
  return kept;
}

TextBag build_text_bag(const std::vector<std::string>& tokens) {
  TextBag bag;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& t : tokens) {
    auto [it, inserted] = slot.try_emplace(t, bag.size());
    if (inserted) bag.emplace_back(t, 0);
    ++bag[it->second].second;
  }
  return bag;
}

VocabularyRegistry::VocabularyRegistry(const std::vector<std::string>& initial) {
  for (const auto& t : initial) intern(t);
}

std::uint32_t VocabularyRegistry::intern(const std::string& term) {
  std::lock_guard lock(mutex_);
  auto [it, inserted] = index_.try_emplace(term, static_cast<std::uint32_t>(terms_.size()));
  if (inserted) terms_.push_back(term);
  return it->second;
}

std::int64_t VocabularyRegistry::find(const std::string& term) const {
  std::lock_guard lock(mutex_);
  auto it = index_.find(term);
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

std::vector<std::string> VocabularyRegistry::terms() const {
  std::lock_guard lock(mutex_);
  return terms_;
}

std::size_t VocabularyRegistry::size() const {
  std::lock_guard lock(mutex_);
  return terms_.size();
}

}  // namespace viralens

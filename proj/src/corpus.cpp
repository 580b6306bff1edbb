#include "viralens/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

#include "viralens/error.hpp"

namespace viralens {

using json = nlohmann::json;

namespace {

// Splits text into CSV records, honoring quoted fields (which may span lines).
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;

  auto end_record = [&] {
    if (any || !field.empty() || !fields.empty()) {
      fields.push_back(std::move(field));
      records.push_back(std::move(fields));
    }
    fields.clear();
    field.clear();
    any = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field += c;
        any = true;
    }
  }
  if (quoted) fail(ErrorKind::Format, "unterminated quoted CSV field");
  end_record();
  return records;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_share(const std::string& raw, const char* column, std::size_t row) {
  const std::string s = trim(raw);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    fail(ErrorKind::Validation,
         "manifest row " + std::to_string(row) + ": " + column + " must be a nonnegative integer, got '" + s + "'");
  return value;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  auto records = parse_csv(line);
  return records.empty() ? std::vector<std::string>{} : std::move(records.front());
}

std::vector<ManifestRecord> parse_manifest(const std::string& csv_text) {
  const auto records = parse_csv(csv_text);
  if (records.empty()) fail(ErrorKind::Schema, "manifest has no header row");

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < records[0].size(); ++i) col.emplace(trim(records[0][i]), i);

  static constexpr const char* kRequired[] = {"id",
                                              "image_path",
                                              "title",
                                              "shares_facebook",
                                              "shares_pinterest",
                                              "shares_linkedin",
                                              "shares_twitter"};
  for (const char* name : kRequired)
    if (!col.count(name)) fail(ErrorKind::Schema, std::string("manifest is missing column '") + name + "'");
  const auto sidecar_col = col.find("token_sidecar");

  std::vector<ManifestRecord> out;
  std::set<std::string> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r];
    auto get = [&](const char* name) -> std::string {
      const std::size_t i = col.at(name);
      return i < f.size() ? f[i] : std::string{};
    };
    ManifestRecord rec;
    rec.id = trim(get("id"));
    if (rec.id.empty()) fail(ErrorKind::Validation, "manifest row " + std::to_string(r) + ": empty id");
    if (!seen.insert(rec.id).second)
      fail(ErrorKind::Validation, "manifest row " + std::to_string(r) + ": duplicate id '" + rec.id + "'");
    rec.image_path = trim(get("image_path"));
    rec.title = get("title");
    rec.shares_facebook = parse_share(get("shares_facebook"), "shares_facebook", r);
    rec.shares_pinterest = parse_share(get("shares_pinterest"), "shares_pinterest", r);
    rec.shares_linkedin = parse_share(get("shares_linkedin"), "shares_linkedin", r);
    rec.shares_twitter = parse_share(get("shares_twitter"), "shares_twitter", r);
    if (sidecar_col != col.end() && sidecar_col->second < f.size()) {
      std::string s = trim(f[sidecar_col->second]);
      if (!s.empty()) rec.token_sidecar = std::move(s);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<ManifestRecord> load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open manifest: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

// ---------------------------------------------------------------------------

DocTermMatrix::DocTermMatrix(std::vector<std::string> doc_ids, std::vector<std::string> vocabulary,
                             std::vector<std::vector<TermCount>> rows)
    : doc_ids_(std::move(doc_ids)), vocabulary_(std::move(vocabulary)), rows_(std::move(rows)) {
  if (doc_ids_.empty()) fail(ErrorKind::Validation, "doc-term matrix needs at least one document");
  if (vocabulary_.empty()) fail(ErrorKind::Validation, "doc-term matrix needs at least one word");
  if (rows_.size() != doc_ids_.size()) fail(ErrorKind::Validation, "row count does not match doc id count");
  for (std::size_t d = 0; d < rows_.size(); ++d) {
    std::int64_t prev = -1;
    for (const TermCount& tc : rows_[d]) {
      if (tc.count == 0) fail(ErrorKind::Validation, "stored counts must be positive (doc " + doc_ids_[d] + ")");
      if (tc.word >= vocabulary_.size()) fail(ErrorKind::Validation, "word index out of range (doc " + doc_ids_[d] + ")");
      if (static_cast<std::int64_t>(tc.word) <= prev)
        fail(ErrorKind::Validation, "row entries must be strictly increasing (doc " + doc_ids_[d] + ")");
      prev = tc.word;
    }
  }
}

std::uint64_t DocTermMatrix::doc_length(std::size_t d) const {
  const auto r = row(d);
  return std::accumulate(r.begin(), r.end(), std::uint64_t{0},
                         [](std::uint64_t acc, const TermCount& tc) { return acc + tc.count; });
}

std::uint64_t DocTermMatrix::total_tokens() const {
  std::uint64_t total = 0;
  for (std::size_t d = 0; d < num_docs(); ++d) total += doc_length(d);
  return total;
}

std::uint32_t DocTermMatrix::count(std::size_t d, std::size_t w) const {
  const auto r = row(d);
  const auto it = std::lower_bound(r.begin(), r.end(), w,
                                   [](const TermCount& tc, std::size_t word) { return tc.word < word; });
  return it != r.end() && it->word == w ? it->count : 0;
}

std::vector<double> DocTermMatrix::dense() const {
  std::vector<double> out(num_docs() * num_words(), 0.0);
  for (std::size_t d = 0; d < num_docs(); ++d)
    for (const TermCount& tc : rows_[d]) out[d * num_words() + tc.word] = tc.count;
  return out;
}

Assembly assemble_doc_term(std::span<const KeyedVisualBag> visual_bags,
                           std::optional<std::span<const KeyedTextBag>> text_bags) {
  if (visual_bags.empty()) fail(ErrorKind::Argument, "assemble_doc_term: no documents");
  const int bins = visual_bags.front().bag.bins_per_channel;
  const QuantizationConfig cfg{bins, 1};
  VocabularyRegistry registry(visual_vocabulary(cfg));

  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < visual_bags.size(); ++i) {
    const auto& vb = visual_bags[i];
    if (vb.bag.bins_per_channel != bins || vb.bag.counts.size() != cfg.vocabulary_size())
      fail(ErrorKind::Argument, "visual bag for '" + vb.doc_id + "' has a different quantization");
    if (!row_of.emplace(vb.doc_id, i).second)
      fail(ErrorKind::Argument, "duplicate document id '" + vb.doc_id + "' in visual bags");
  }

  std::vector<std::map<std::uint32_t, std::uint32_t>> merged(visual_bags.size());
  for (std::size_t i = 0; i < visual_bags.size(); ++i) {
    const auto& counts = visual_bags[i].bag.counts;
    for (std::uint32_t w = 0; w < counts.size(); ++w)
      if (counts[w]) merged[i][w] += counts[w];
  }

  if (text_bags) {
    std::set<std::string> text_ids;
    for (const auto& tb : *text_bags) text_ids.insert(tb.doc_id);
    std::vector<std::string> only_visual, only_text;
    for (const auto& [id, _] : row_of)
      if (!text_ids.count(id)) only_visual.push_back(id);
    for (const auto& id : text_ids)
      if (!row_of.count(id)) only_text.push_back(id);
    if (!only_visual.empty() || !only_text.empty() || text_ids.size() != text_bags->size()) {
      std::string msg = "visual and text bags cover different documents;";
      auto list = [&](const char* what, const std::vector<std::string>& ids) {
        if (ids.empty()) return;
        msg += std::string(" ") + what + ":";
        for (const auto& id : ids) msg += " " + id;
        msg += ";";
      };
      list("missing text", only_visual);
      list("missing visual", only_text);
      if (text_ids.size() != text_bags->size()) msg += " duplicate ids in text bags;";
      fail(ErrorKind::Argument, msg);
    }
    for (const auto& tb : *text_bags) {
      auto& row = merged[row_of.at(tb.doc_id)];
      for (const auto& [term, n] : tb.bag)
        if (n) row[registry.intern(term)] += n;
    }
  }

  std::vector<std::string> ids;
  std::vector<std::vector<TermCount>> rows(visual_bags.size());
  std::vector<std::string> warnings;
  std::vector<std::size_t> empty_rows;
  for (std::size_t i = 0; i < visual_bags.size(); ++i) {
    ids.push_back(visual_bags[i].doc_id);
    for (const auto& [w, n] : merged[i]) rows[i].push_back({w, n});
    if (rows[i].empty()) {
      empty_rows.push_back(i);
      warnings.push_back("document '" + visual_bags[i].doc_id + "' has no tokens; kept as an all-zero row");
    }
  }
  return {DocTermMatrix(std::move(ids), registry.terms(), std::move(rows)), std::move(warnings),
          std::move(empty_rows)};
}

// ---------------------------------------------------------------------------

namespace {

json record_to_json(const ManifestRecord& r) {
  json j = {{"id", r.id},
            {"image_path", r.image_path},
            {"title", r.title},
            {"shares_facebook", r.shares_facebook},
            {"shares_pinterest", r.shares_pinterest},
            {"shares_linkedin", r.shares_linkedin},
            {"shares_twitter", r.shares_twitter}};
  j["token_sidecar"] = r.token_sidecar ? json(*r.token_sidecar) : json(nullptr);
  return j;
}

ManifestRecord record_from_json(const json& j) {
  ManifestRecord r;
  r.id = j.at("id").get<std::string>();
  r.image_path = j.at("image_path").get<std::string>();
  r.title = j.at("title").get<std::string>();
  r.shares_facebook = j.at("shares_facebook").get<std::uint64_t>();
  r.shares_pinterest = j.at("shares_pinterest").get<std::uint64_t>();
  r.shares_linkedin = j.at("shares_linkedin").get<std::uint64_t>();
  r.shares_twitter = j.at("shares_twitter").get<std::uint64_t>();
  if (j.contains("token_sidecar") && !j["token_sidecar"].is_null())
    r.token_sidecar = j["token_sidecar"].get<std::string>();
  return r;
}

constexpr int kCorpusFormatVersion = 1;

}  // namespace

void save_corpus(const CorpusFile& corpus, const std::string& path) {
  if (corpus.records.size() != corpus.matrix.num_docs())
    fail(ErrorKind::Validation, "corpus records are not aligned with matrix rows");
  json rows = json::array();
  for (const auto& row : corpus.matrix.rows()) {
    json r = json::array();
    for (const TermCount& tc : row) r.push_back({tc.word, tc.count});
    rows.push_back(std::move(r));
  }
  json records = json::array();
  for (const auto& rec : corpus.records) records.push_back(record_to_json(rec));

  const json doc = {
      {"format", "viralens-corpus"},
      {"format_version", kCorpusFormatVersion},
      {"quantization",
       {{"bins_per_channel", corpus.quantization.bins_per_channel},
        {"tokens_per_channel", corpus.quantization.tokens_per_channel}}},
      {"records", std::move(records)},
      {"matrix", {{"doc_ids", corpus.matrix.doc_ids()}, {"vocabulary", corpus.matrix.vocabulary()}, {"rows", rows}}}};

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write corpus file: " + path);
  out << doc.dump(1) << '\n';
  if (!out) fail(ErrorKind::Io, "failed writing corpus file: " + path);
}

CorpusFile load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open corpus file: " + path);
  json doc;
  try {
    doc = json::parse(in);
    if (doc.at("format").get<std::string>() != "viralens-corpus")
      fail(ErrorKind::Format, path + ": not a corpus file");
    const int version = doc.at("format_version").get<int>();
    if (version != kCorpusFormatVersion)
      fail(ErrorKind::Format, path + ": unsupported corpus format_version " + std::to_string(version));

    QuantizationConfig q{doc.at("quantization").at("bins_per_channel").get<int>(),
                         doc.at("quantization").at("tokens_per_channel").get<int>()};
    std::vector<ManifestRecord> records;
    for (const auto& r : doc.at("records")) records.push_back(record_from_json(r));
    const json& m = doc.at("matrix");
    std::vector<std::vector<TermCount>> rows;
    for (const auto& r : m.at("rows")) {
      auto& row = rows.emplace_back();
      for (const auto& e : r) row.push_back({e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>()});
    }
    CorpusFile out{q, std::move(records),
                   DocTermMatrix(m.at("doc_ids").get<std::vector<std::string>>(),
                                 m.at("vocabulary").get<std::vector<std::string>>(), std::move(rows))};
    if (out.records.size() != out.matrix.num_docs())
      fail(ErrorKind::Format, path + ": records are not aligned with matrix rows");
    return out;
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, path + ": malformed corpus file: " + e.what());
  }
}

}  // namespace viralens

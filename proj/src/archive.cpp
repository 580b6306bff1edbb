#include "viralens/archive.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "viralens/error.hpp"
#include "viralens/rng.hpp"

namespace viralens {

using json = nlohmann::json;

bool ViralSet::contains(std::uint32_t k) const { return std::binary_search(clusters.begin(), clusters.end(), k); }

void ModelArchive::validate() const {
  if (format_version != kArchiveFormatVersion)
    fail(ErrorKind::Format, "unsupported archive format_version " + std::to_string(format_version));
  quantization.validate();
  lda.validate();
  const auto k = static_cast<std::size_t>(lda.k);
  if (cluster_stats.size() != k)
    fail(ErrorKind::Validation, "cluster_stats has " + std::to_string(cluster_stats.size()) + " clusters, model has K = " +
                                    std::to_string(k));
  if (labels.size() != k) fail(ErrorKind::Validation, "labels must have K entries");
  for (std::uint32_t c : viral.clusters)
    if (c >= k) fail(ErrorKind::Validation, "viral cluster index out of range");
  if (!std::is_sorted(viral.clusters.begin(), viral.clusters.end()) ||
      std::adjacent_find(viral.clusters.begin(), viral.clusters.end()) != viral.clusters.end())
    fail(ErrorKind::Validation, "viral cluster set must be sorted and unique");
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json to_json(const ModelArchive& a) {
  json phi = json::array();
  for (Eigen::Index k = 0; k < a.lda.phi.rows(); ++k) {
    json row = json::array();
    for (Eigen::Index w = 0; w < a.lda.phi.cols(); ++w) row.push_back(a.lda.phi(k, w));
    phi.push_back(std::move(row));
  }
  json stats = json::array();
  for (const auto& c : a.cluster_stats.clusters)
    stats.push_back({{"frequency", c.frequency}, {"average", optional_number(c.mean)}, {"variance", optional_number(c.variance)}});

  return {
      {"format_version", a.format_version},
      {"quantization",
       {{"bins_per_channel", a.quantization.bins_per_channel},
        {"tokens_per_channel", a.quantization.tokens_per_channel},
        {"subsample_cap", a.extraction.subsample_cap},
        {"kmeans_restarts", a.extraction.kmeans.restarts},
        {"kmeans_max_iterations", a.extraction.kmeans.max_iterations}}},
      {"vocabulary", a.lda.vocabulary},
      {"lda",
       {{"k", a.lda.k},
        {"alpha", a.lda.alpha},
        {"eta", a.lda.eta},
        {"phi", std::move(phi)},
        {"ll_trace", a.lda.ll_trace},
        {"fold_in_seed", a.fold_in_seed},
        {"fold_in_sweeps", a.fold_in.sweeps},
        {"fold_in_burn_in", a.fold_in.burn_in}}},
      {"cluster_stats", std::move(stats)},
      {"viral_clusters", {{"clusters", a.viral.clusters}, {"rule", a.viral.rule}, {"confidence", a.viral.confidence}}},
      {"labels", a.labels},
  };
}

ModelArchive from_json(const json& j) {
  ModelArchive a;
  a.format_version = j.at("format_version").get<int>();
  if (a.format_version != kArchiveFormatVersion)
    fail(ErrorKind::Format, "unsupported archive format_version " + std::to_string(a.format_version));

  const json& q = j.at("quantization");
  a.quantization.bins_per_channel = q.at("bins_per_channel").get<int>();
  a.quantization.tokens_per_channel = q.at("tokens_per_channel").get<int>();
  a.extraction.subsample_cap = q.value("subsample_cap", a.extraction.subsample_cap);
  a.extraction.kmeans.restarts = q.value("kmeans_restarts", a.extraction.kmeans.restarts);
  a.extraction.kmeans.max_iterations = q.value("kmeans_max_iterations", a.extraction.kmeans.max_iterations);

  const json& l = j.at("lda");
  a.lda.k = l.at("k").get<int>();
  a.lda.alpha = l.at("alpha").get<std::vector<double>>();
  a.lda.eta = l.at("eta").get<double>();
  a.lda.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
  const auto rows = l.at("phi").get<std::vector<std::vector<double>>>();
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  a.lda.phi.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != cols) fail(ErrorKind::Validation, "ragged topic-word matrix");
    for (std::size_t w = 0; w < cols; ++w)
      a.lda.phi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(w)) = rows[k][w];
  }
  a.lda.ll_trace = l.value("ll_trace", std::vector<double>{});
  a.fold_in_seed = l.value("fold_in_seed", a.fold_in_seed);
  a.fold_in.sweeps = l.value("fold_in_sweeps", a.fold_in.sweeps);
  a.fold_in.burn_in = l.value("fold_in_burn_in", a.fold_in.burn_in);

  for (const auto& c : j.at("cluster_stats")) {
    ClusterSummary s;
    s.frequency = c.at("frequency").get<std::uint64_t>();
    s.mean = read_optional(c.at("average"));
    s.variance = read_optional(c.at("variance"));
    a.cluster_stats.clusters.push_back(std::move(s));
  }
  a.labels = j.at("labels").get<std::vector<std::string>>();
  for (std::size_t k = 0; k < a.labels.size() && k < a.cluster_stats.size(); ++k)
    a.cluster_stats.clusters[k].label = a.labels[k];

  const json& v = j.at("viral_clusters");
  a.viral.clusters = v.at("clusters").get<std::vector<std::uint32_t>>();
  a.viral.rule = v.value("rule", a.viral.rule);
  a.viral.confidence = v.value("confidence", a.viral.confidence);
  a.validate();
  return a;
}

}  // namespace

std::string archive_to_string(const ModelArchive& archive) {
  archive.validate();
  return to_json(archive).dump(1) + "\n";
}

ModelArchive archive_from_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Format, std::string("archive is not valid JSON: ") + e.what());
  }
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, std::string("archive is malformed: ") + e.what());
  }
}

void save_archive(const ModelArchive& archive, const std::string& path) {
  const std::string text = archive_to_string(archive);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write archive: " + path);
  out << text;
  if (!out) fail(ErrorKind::Io, "failed writing archive: " + path);
}

ModelArchive load_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open archive: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return archive_from_string(ss.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

std::string model_version(const ModelArchive& archive) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "v%d-%016llx", archive.format_version,
                static_cast<unsigned long long>(hash_string(to_json(archive).dump())));
  return buf;
}

}  // namespace viralens

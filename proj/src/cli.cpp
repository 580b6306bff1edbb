#include "viralens/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "viralens/dss.hpp"
#include "viralens/error.hpp"
#include "viralens/pipeline.hpp"
#include "viralens/report.hpp"
#include "viralens/service.hpp"
#include "viralens/svd.hpp"

namespace viralens::cli {

using json = nlohmann::json;

namespace {

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot write " + path);
  f << content;
  if (!f) fail(ErrorKind::Io, "failed writing " + path);
}

std::string fmt17(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

// Shared LDA flags for train and select-k.
struct LdaFlags {
  std::vector<double> alpha;
  double eta = 0.1;
  int sweeps = 1000;
  int burn_in = 200;

  void add(CLI::App& cmd) {
    cmd.add_option("--alpha", alpha, "document-topic prior: one value or K values (default 50/K)")->delimiter(',');
    cmd.add_option("--eta", eta, "topic-word prior")->capture_default_str();
    cmd.add_option("--sweeps", sweeps, "Gibbs sweeps")->capture_default_str();
    cmd.add_option("--burn-in", burn_in, "sweeps discarded before averaging")->capture_default_str();
  }

  LdaHyperparams make(int k, std::uint64_t seed) const {
    LdaHyperparams hp;
    hp.k = k;
    hp.alpha = alpha;
    hp.eta = eta;
    hp.sweeps = sweeps;
    hp.burn_in = burn_in;
    hp.seed = seed;
    return hp;
  }
};

json descriptor_json(const VisualDescriptor& d) {
  json clusters = json::array();
  for (const ColorCluster& c : d.clusters) {
    clusters.push_back({{"density", c.density},
                        {"mean_rgb", {c.mean[0], c.mean[1], c.mean[2]}},
                        {"mean_hsv", {c.mean[3], c.mean[4], c.mean[5]}}});
  }
  return {{"clusters", std::move(clusters)}, {"real_clusters", d.real_clusters}};
}

json bag_json(const VisualBag& bag) {
  const auto names = visual_vocabulary({bag.bins_per_channel, 1});
  json out = json::object();
  for (std::size_t w = 0; w < bag.counts.size(); ++w)
    if (bag.counts[w]) out[names[w]] = bag.counts[w];
  return out;
}

// Reads a cluster summary CSV with columns label,frequency,average,variance
// (an optional leading cluster column is ignored).
ClusterStats read_summary_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Schema, path + ": missing header");
  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  };
  const auto freq = column("frequency"), avg = column("average"), var = column("variance"), label = column("label");
  if (!freq || !avg || !var)
    fail(ErrorKind::Schema, path + ": summary needs frequency, average and variance columns");

  auto number = [&](const std::string& s) -> std::optional<double> {
    if (s.empty() || s == "NA") return std::nullopt;
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      fail(ErrorKind::Validation, path + ": not a number: '" + s + "'");
    }
  };

  ClusterStats stats;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto f = split_csv_line(line);
    auto get = [&](std::size_t i) { return i < f.size() ? f[i] : std::string{}; };
    ClusterSummary c;
    const auto n = number(get(*freq));
    if (!n || *n < 0) fail(ErrorKind::Validation, path + ": frequency must be a nonnegative number");
    c.frequency = static_cast<std::uint64_t>(*n);
    c.mean = number(get(*avg));
    c.variance = number(get(*var));
    if (label) c.label = get(*label);
    stats.clusters.push_back(std::move(c));
  }
  return stats;
}

std::string render_tables(const ClusterStats& stats, const PairwiseMatrix& tests, const std::string& format) {
  if (format == "json") return report::tables_json(stats, tests).dump(2) + "\n";
  if (format == "csv") return report::table1_csv(stats) + "\n" + report::table2_csv(tests);
  return report::table1_text(stats) + "\n" + report::table2_text(tests);
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

HttpServer* g_server = nullptr;

extern "C" void handle_stop_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"viralens: infographic virality decision support", "viralens"};
  app.require_subcommand(1);
  app.fallthrough(false);

  std::uint64_t seed = 42;
  std::string format;
  std::string out_path;
  std::map<const CLI::App*, std::string> default_format;
  auto add_seed = [&](CLI::App* cmd) { cmd->add_option("--seed", seed, "random seed")->capture_default_str(); };
  auto add_format = [&](CLI::App* cmd, const std::string& def) {
    default_format[cmd] = def;
    cmd->add_option("--format", format, "output format (default " + def + ")")
        ->check(CLI::IsMember({"json", "csv", "text"}));
  };
  auto add_out = [&](CLI::App* cmd, bool required) {
    auto* opt = cmd->add_option("--out", out_path, "output file (default: stdout)");
    if (required) opt->required();
  };

  // ingest
  std::string manifest, dictionary;
  QuantizationConfig quant;
  std::size_t subsample_cap = ExtractionOptions{}.subsample_cap;
  auto add_quant = [&](CLI::App* cmd) {
    cmd->add_option("--bins", quant.bins_per_channel, "bins per color channel")->capture_default_str();
    cmd->add_option("--tokens", quant.tokens_per_channel, "pseudo-tokens per channel")->capture_default_str();
    cmd->add_option("--subsample-cap", subsample_cap, "max pixels clustered per image")->capture_default_str();
  };
  auto* ingest_cmd = app.add_subcommand("ingest", "build a doc-term corpus from a manifest");
  ingest_cmd->add_option("--manifest", manifest, "manifest CSV")->required();
  ingest_cmd->add_option("--dictionary", dictionary, "word-per-line dictionary enabling OCR token sidecars");
  add_quant(ingest_cmd);
  add_seed(ingest_cmd);
  add_out(ingest_cmd, true);

  auto* features_cmd = app.add_subcommand("features", "emit per-image descriptors and visual bags");
  features_cmd->add_option("--manifest", manifest, "manifest CSV")->required();
  add_quant(features_cmd);
  add_seed(features_cmd);
  add_format(features_cmd, "json");
  add_out(features_cmd, false);

  // train
  std::string corpus_path, trace_path, theta_path;
  int k = 12, restarts = 1;
  double confidence = 0.95;
  std::vector<std::uint32_t> viral_override;
  LdaFlags lda_flags;
  auto* train_cmd = app.add_subcommand("train", "fit the topic model and write a model archive");
  train_cmd->add_option("--corpus", corpus_path, "corpus file from ingest")->required();
  train_cmd->add_option("--k", k, "number of topics")->capture_default_str();
  train_cmd->add_option("--restarts", restarts, "independent chains; the best log-likelihood wins")->capture_default_str();
  train_cmd->add_option("--confidence", confidence, "t-test confidence level")->capture_default_str();
  train_cmd->add_option("--viral", viral_override, "explicit viral clusters (1-based), overriding the test rule")->delimiter(',');
  train_cmd->add_option("--trace", trace_path, "write the log-likelihood trace as CSV");
  train_cmd->add_option("--theta", theta_path, "write document-topic proportions as CSV");
  lda_flags.add(*train_cmd);
  add_seed(train_cmd);
  add_out(train_cmd, true);

  std::vector<int> candidates;
  auto* select_cmd = app.add_subcommand("select-k", "choose the topic count by maximum log-likelihood");
  select_cmd->add_option("--corpus", corpus_path, "corpus file from ingest")->required();
  select_cmd->add_option("--candidates", candidates, "comma-separated K values")->delimiter(',')->required();
  select_cmd->add_option("--restarts", restarts, "chains per K")->capture_default_str();
  lda_flags.add(*select_cmd);
  add_seed(select_cmd);
  add_format(select_cmd, "text");
  add_out(select_cmd, false);

  double threshold = 0.95;
  auto* reduce_cmd = app.add_subcommand("reduce", "truncated SVD features keeping a share of the energy");
  reduce_cmd->add_option("--corpus", corpus_path, "corpus file from ingest")->required();
  reduce_cmd->add_option("--threshold", threshold, "energy share to keep")->capture_default_str();
  add_out(reduce_cmd, false);

  std::string archive_path, summary_path;
  auto* stats_cmd = app.add_subcommand("stats", "cluster statistics and pairwise t-tests");
  auto* stats_src = stats_cmd->add_option_group("source");
  stats_src->add_option("--archive", archive_path, "model archive");
  stats_src->add_option("--summary", summary_path, "CSV of label,frequency,average,variance per cluster");
  stats_src->require_option(1);
  stats_cmd->add_option("--confidence", confidence, "t-test confidence level")->capture_default_str();
  add_format(stats_cmd, "text");
  add_out(stats_cmd, false);

  std::string image, image_a, image_b;
  auto* score_cmd = app.add_subcommand("score", "score one design against a model archive");
  score_cmd->add_option("--archive", archive_path, "model archive")->required();
  score_cmd->add_option("--image", image, "PNG or JPEG")->required();
  add_format(score_cmd, "text");
  add_out(score_cmd, false);

  auto* compare_cmd = app.add_subcommand("compare", "A/B comparison of two design variants");
  compare_cmd->add_option("--archive", archive_path, "model archive")->required();
  compare_cmd->add_option("--image-a", image_a, "variant A")->required();
  compare_cmd->add_option("--image-b", image_b, "variant B")->required();
  add_format(compare_cmd, "text");
  add_out(compare_cmd, false);

  std::string host = "0.0.0.0", cors = "*";
  int port = 0;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP API over a model archive");
  serve_cmd->add_option("--archive", archive_path, "model archive (env VIRALENS_ARCHIVE)");
  serve_cmd->add_option("--port", port, "listen port (env VIRALENS_PORT, default 8080)");
  serve_cmd->add_option("--host", host, "listen address")->capture_default_str();
  serve_cmd->add_option("--cors-origin", cors, "Access-Control-Allow-Origin value")->capture_default_str();

  std::size_t top_words = 8;
  auto* report_cmd = app.add_subcommand("report", "summarize a model archive");
  report_cmd->add_option("--archive", archive_path, "model archive")->required();
  report_cmd->add_option("--top-words", top_words, "words listed per topic")->capture_default_str();
  add_format(report_cmd, "text");
  add_out(report_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "viralens: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  const std::string stage = chosen->get_name();
  if (format.empty() && default_format.count(chosen)) format = default_format.at(chosen);
  try {
    if (*ingest_cmd) {
      IngestOptions opts;
      opts.quantization = quant;
      opts.extraction.subsample_cap = subsample_cap;
      opts.seed = seed;
      if (!dictionary.empty()) opts.dictionary_path = dictionary;
      quant.validate();
      const IngestResult res = ingest(manifest, opts);
      for (const auto& w : res.warnings) err << "viralens ingest: warning: " << w << "\n";
      save_corpus(res.corpus, out_path);
      err << "viralens ingest: " << res.corpus.matrix.num_docs() << " documents x " << res.corpus.matrix.num_words()
          << " words -> " << out_path << "\n";
    } else if (*features_cmd) {
      quant.validate();
      const auto records = load_manifest(manifest);
      ExtractionOptions extraction;
      extraction.subsample_cap = subsample_cap;
      const std::string base = std::filesystem::path(manifest).parent_path().string();
      const auto feats = extract_features(records, base, quant, extraction, seed);
      std::ostringstream ss;
      if (format == "text") {
        for (const auto& f : feats) {
          ss << f.doc_id << "\n";
          for (const ColorCluster& c : f.descriptor.clusters) {
            ss << "  density " << std::fixed << std::setprecision(4) << c.density << "  mean";
            for (double m : c.mean) ss << " " << std::setprecision(3) << m;
            ss << "\n";
          }
        }
      } else if (format == "csv") {
        const auto names = visual_vocabulary(quant);
        ss << "doc_id";
        for (const auto& n : names) ss << "," << n;
        ss << "\n";
        for (const auto& f : feats) {
          ss << f.doc_id;
          for (auto c : f.bag.counts) ss << "," << c;
          ss << "\n";
        }
      } else {
        for (const auto& f : feats)
          ss << json{{"doc_id", f.doc_id}, {"descriptor", descriptor_json(f.descriptor)}, {"bag", bag_json(f.bag)}}.dump()
             << "\n";
      }
      write_output(out_path, ss.str(), out);
    } else if (*train_cmd) {
      const CorpusFile corpus = load_corpus(corpus_path);
      TrainOptions opts;
      opts.hp = lda_flags.make(k, seed);
      opts.restarts = restarts;
      opts.confidence = confidence;
      if (!viral_override.empty()) {
        std::vector<std::uint32_t> zero_based;
        for (auto c : viral_override) {
          if (c < 1) fail(ErrorKind::Argument, "--viral clusters are numbered from 1");
          zero_based.push_back(c - 1);
        }
        opts.viral_override = std::move(zero_based);
      }
      const TrainedModel model = train_model(corpus, opts);
      save_archive(model.archive, out_path);
      if (!trace_path.empty()) {
        std::ostringstream ss;
        ss << "sweep,log_likelihood\n";
        for (std::size_t s = 0; s < model.fit.model.ll_trace.size(); ++s)
          ss << (s + 1) << "," << fmt17(model.fit.model.ll_trace[s]) << "\n";
        write_output(trace_path, ss.str(), out);
      }
      if (!theta_path.empty()) {
        std::ostringstream ss;
        ss << "doc_id";
        for (int c = 0; c < k; ++c) ss << ",topic_" << (c + 1);
        ss << "\n";
        for (Eigen::Index d = 0; d < model.fit.theta.rows(); ++d) {
          ss << corpus.matrix.doc_ids()[static_cast<std::size_t>(d)];
          for (Eigen::Index c = 0; c < model.fit.theta.cols(); ++c) ss << "," << fmt17(model.fit.theta(d, c));
          ss << "\n";
        }
        write_output(theta_path, ss.str(), out);
      }
      for (std::size_t d : model.fit.skipped_docs)
        err << "viralens train: warning: document '" << corpus.matrix.doc_ids()[d] << "' has no tokens; skipped\n";
      err << "viralens train: K=" << k << " log-likelihood " << fmt17(model.fit.log_likelihood) << " -> " << out_path
          << "\n";
    } else if (*select_cmd) {
      const CorpusFile corpus = load_corpus(corpus_path);
      const KSelection sel = select_k(corpus.matrix, candidates, restarts, lda_flags.make(candidates.front(), seed));
      std::ostringstream ss;
      if (format == "json") {
        json rows = json::array();
        for (const auto& r : sel.table)
          rows.push_back({{"k", r.k}, {"best_log_likelihood", r.best_log_likelihood}, {"restarts", r.restart_log_likelihoods}});
        ss << json{{"best_k", sel.best_k}, {"table", rows}}.dump(2) << "\n";
      } else if (format == "csv") {
        ss << "k,best_log_likelihood\n";
        for (const auto& r : sel.table) ss << r.k << "," << fmt17(r.best_log_likelihood) << "\n";
      } else {
        for (const auto& r : sel.table)
          ss << "K=" << std::setw(3) << r.k << "  max log-likelihood " << std::fixed << std::setprecision(3)
             << r.best_log_likelihood << (r.k == sel.best_k ? "  <- best" : "") << "\n";
      }
      write_output(out_path, ss.str(), out);
    } else if (*reduce_cmd) {
      const CorpusFile corpus = load_corpus(corpus_path);
      const EnergyReduction red = reduce_energy(to_dense(corpus.matrix), threshold);
      std::ostringstream ss;
      ss << "doc_id";
      for (std::size_t f = 0; f < red.rank; ++f) ss << ",f" << (f + 1);
      ss << "\n";
      for (Eigen::Index d = 0; d < red.reduced.rows(); ++d) {
        ss << corpus.matrix.doc_ids()[static_cast<std::size_t>(d)];
        for (Eigen::Index f = 0; f < red.reduced.cols(); ++f) ss << "," << fmt17(red.reduced(d, f));
        ss << "\n";
      }
      write_output(out_path, ss.str(), out);
      err << "viralens reduce: rank " << red.rank << " keeps " << std::setprecision(6) << red.retained_energy
          << " of the energy\n";
    } else if (*stats_cmd) {
      ClusterStats stats;
      if (!archive_path.empty()) {
        const ModelArchive archive = load_archive(archive_path);
        stats = archive.cluster_stats;
      } else {
        stats = read_summary_csv(summary_path);
      }
      const PairwiseMatrix tests = pairwise_matrix(stats, confidence);
      write_output(out_path, render_tables(stats, tests, format), out);
    } else if (*score_cmd) {
      const ModelArchive archive = load_archive(archive_path);
      const ScoreReport r = score(archive, read_bytes(image));
      write_output(out_path,
                   format == "text" ? report::score_text(r) : report::score_json(archive, r).dump(2) + "\n", out);
    } else if (*compare_cmd) {
      const ModelArchive archive = load_archive(archive_path);
      const auto a = read_bytes(image_a);
      const auto b = read_bytes(image_b);
      const CompareReport r = compare(archive, a, b);
      write_output(out_path,
                   format == "text" ? report::compare_text(r) : report::compare_json(archive, r).dump(2) + "\n", out);
    } else if (*serve_cmd) {
      if (archive_path.empty()) archive_path = env_or("VIRALENS_ARCHIVE", "");
      if (port == 0) port = std::stoi(env_or("VIRALENS_PORT", "8080"));
      std::optional<ModelArchive> archive;
      if (!archive_path.empty()) archive = load_archive(archive_path);
      else err << "viralens serve: warning: no archive; model endpoints answer 503\n";
      const Service service(std::move(archive), cors);
      HttpServer server(service);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, handle_stop_signal);
      std::signal(SIGTERM, handle_stop_signal);
      err << "viralens serve: listening on " << host << ":" << bound << "\n";
      server.listen();
      g_server = nullptr;
    } else if (*report_cmd) {
      const ModelArchive archive = load_archive(archive_path);
      const PairwiseMatrix tests = pairwise_matrix(archive.cluster_stats, archive.viral.confidence);
      const auto& phi = archive.lda.phi;
      std::vector<std::vector<std::pair<std::string, double>>> top(static_cast<std::size_t>(archive.lda.k));
      for (Eigen::Index c = 0; c < phi.rows(); ++c) {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(phi.cols()));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        std::stable_sort(idx.begin(), idx.end(), [&](auto x, auto y) { return phi(c, x) > phi(c, y); });
        for (std::size_t i = 0; i < std::min(top_words, idx.size()); ++i)
          top[static_cast<std::size_t>(c)].emplace_back(archive.lda.vocabulary[static_cast<std::size_t>(idx[i])],
                                                        phi(c, idx[i]));
      }
      std::ostringstream ss;
      if (format == "json") {
        json topics = json::array();
        for (std::size_t c = 0; c < top.size(); ++c) {
          json words = json::array();
          for (const auto& [w, p] : top[c]) words.push_back({{"word", w}, {"probability", p}});
          topics.push_back({{"cluster", c}, {"label", archive.labels[c]}, {"top_words", words}});
        }
        ss << json{{"model_version", model_version(archive)},
                   {"k", archive.lda.k},
                   {"vocabulary_size", archive.lda.num_words()},
                   {"viral_clusters", archive.viral.clusters},
                   {"viral_rule", archive.viral.rule},
                   {"topics", topics},
                   {"tables", report::tables_json(archive.cluster_stats, tests)}}
                  .dump(2)
           << "\n";
      } else {
        ss << "model " << model_version(archive) << ": K=" << archive.lda.k << ", " << archive.lda.num_words()
           << " words, viral rule '" << archive.viral.rule << "'\n\n";
        for (std::size_t c = 0; c < top.size(); ++c) {
          ss << "cluster " << (c + 1) << " [" << archive.labels[c] << "]"
             << (archive.viral.contains(static_cast<std::uint32_t>(c)) ? " (viral)" : "") << ":";
          for (const auto& [w, p] : top[c]) ss << " " << w;
          ss << "\n";
        }
        ss << "\n" << render_tables(archive.cluster_stats, tests, "text");
      }
      write_output(out_path, ss.str(), out);
    }
    return 0;
  } catch (const Error& e) {
    err << "viralens " << stage << ": " << to_string(e.kind()) << " error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Io ? 2 : 1;
  } catch (const std::exception& e) {
    err << "viralens " << stage << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace viralens::cli

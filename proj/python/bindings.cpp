#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "viralens/analytics.hpp"
#include "viralens/archive.hpp"
#include "viralens/corpus.hpp"
#include "viralens/dss.hpp"
#include "viralens/pipeline.hpp"
#include "viralens/report.hpp"
#include "viralens/svd.hpp"
#include "viralens/vision.hpp"

namespace py = pybind11;
using namespace viralens;

namespace {

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

std::span<const std::uint8_t> as_bytes(const py::bytes& b, std::string& holder) {
  holder = b;
  return {reinterpret_cast<const std::uint8_t*>(holder.data()), holder.size()};
}

class Model {
 public:
  explicit Model(const std::string& path) : archive_(load_archive(path)) {}

  std::string version() const { return model_version(archive_); }
  py::object clusters() const { return to_python(report::clusters_json(archive_)); }

  py::object score(const py::bytes& image) const {
    std::string holder;
    auto bytes = as_bytes(image, holder);
    ScoreReport r;
    {
      py::gil_scoped_release release;
      r = viralens::score(archive_, bytes);
    }
    return to_python(report::score_json(archive_, r));
  }

  py::object compare(const py::bytes& a, const py::bytes& b) const {
    std::string ha, hb;
    auto ba = as_bytes(a, ha);
    auto bb = as_bytes(b, hb);
    std::optional<CompareReport> r;
    {
      py::gil_scoped_release release;
      r.emplace(viralens::compare(archive_, ba, bb));
    }
    return to_python(report::compare_json(archive_, *r));
  }

  py::object tables(double confidence) const {
    return to_python(report::tables_json(archive_.cluster_stats, pairwise_matrix(archive_.cluster_stats, confidence)));
  }

 private:
  ModelArchive archive_;
};

py::dict ingest_py(const std::string& manifest, const std::string& out, std::optional<std::string> dictionary,
                   int bins, int tokens, std::uint64_t seed) {
  IngestOptions opt;
  opt.quantization.bins_per_channel = bins;
  opt.quantization.tokens_per_channel = tokens;
  opt.dictionary_path = std::move(dictionary);
  opt.seed = seed;
  IngestResult res = ingest(manifest, opt);
  save_corpus(res.corpus, out);
  py::dict d;
  d["documents"] = res.corpus.matrix.rows().size();
  d["vocabulary"] = res.corpus.matrix.vocabulary().size();
  d["warnings"] = res.warnings;
  return d;
}

py::dict train_py(const std::string& corpus_path, const std::string& out, int k, std::vector<double> alpha, double eta,
                  int sweeps, int burn_in, std::uint64_t seed, int restarts, double confidence) {
  CorpusFile corpus = load_corpus(corpus_path);
  TrainOptions opt;
  opt.hp.k = k;
  opt.hp.alpha = std::move(alpha);
  opt.hp.eta = eta;
  opt.hp.sweeps = sweeps;
  opt.hp.burn_in = burn_in;
  opt.hp.seed = seed;
  opt.restarts = restarts;
  opt.confidence = confidence;
  std::optional<TrainedModel> m;
  {
    py::gil_scoped_release release;
    m.emplace(train_model(corpus, opt));
  }
  save_archive(m->archive, out);
  py::dict d;
  d["log_likelihood"] = m->fit.log_likelihood;
  d["viral_clusters"] = m->archive.viral.clusters;
  d["version"] = model_version(m->archive);
  return d;
}

py::object pooled_t_test_py(double n_a, double mean_a, double var_a, double n_b, double mean_b, double var_b,
                            double confidence) {
  auto r = pooled_t_test({n_a, mean_a, var_a}, {n_b, mean_b, var_b}, confidence);
  if (!r) return py::none();
  py::dict d;
  d["t_stat"] = r->t_stat;
  d["df"] = r->df;
  d["t_crit"] = r->t_crit;
  d["significant"] = r->significant;
  return d;
}

py::dict kmeans_py(const std::vector<std::vector<double>>& points, std::size_t k, std::uint64_t seed, int restarts,
                   int max_iterations) {
  if (points.empty()) fail(ErrorKind::Argument, "kmeans needs at least one point");
  std::size_t dim = points.front().size();
  std::vector<double> coords;
  for (const auto& p : points) {
    if (p.size() != dim) fail(ErrorKind::Argument, "points must share one dimension");
    coords.insert(coords.end(), p.begin(), p.end());
  }
  KMeansOptions opt;
  opt.restarts = restarts;
  opt.max_iterations = max_iterations;
  KMeansResult r = kmeans(PointSet(dim, std::move(coords)), k, seed, opt);
  std::vector<std::vector<double>> centers;
  for (std::size_t i = 0; i < r.centers.size(); ++i) {
    auto c = r.centers[i];
    centers.emplace_back(c.begin(), c.end());
  }
  py::dict d;
  d["centers"] = centers;
  d["assignment"] = r.assignment;
  d["inertia"] = r.inertia;
  d["inertia_trace"] = r.inertia_trace;
  d["iterations"] = r.iterations;
  return d;
}

std::vector<double> singular_values_py(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Eigen::MatrixXd a(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != static_cast<std::size_t>(a.cols())) fail(ErrorKind::Argument, "ragged matrix");
    for (std::size_t j = 0; j < rows[i].size(); ++j) a(i, j) = rows[i][j];
  }
  SvdResult r = svd(a);
  return {r.singular_values.data(), r.singular_values.data() + r.singular_values.size()};
}

}  // namespace

PYBIND11_MODULE(_viralens, m) {
  m.doc() = "Topic-model scoring of visual designs";

  // Leaked on purpose: the translator may run until interpreter shutdown.
  static PyObject* base = py::exception<Error>(m, "ViralensError", PyExc_RuntimeError).release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      std::string msg = std::string(to_string(e.kind())) + " error: " + e.what();
      if (e.kind() == ErrorKind::Io)
        PyErr_SetString(PyExc_OSError, msg.c_str());
      else
        PyErr_SetString(base, msg.c_str());
    }
  });

  py::class_<Model>(m, "Model")
      .def(py::init<const std::string&>(), py::arg("archive"))
      .def_property_readonly("version", &Model::version)
      .def("clusters", &Model::clusters)
      .def("score", &Model::score, py::arg("image"))
      .def("compare", &Model::compare, py::arg("image_a"), py::arg("image_b"))
      .def("tables", &Model::tables, py::arg("confidence") = 0.95);

  m.def("ingest", &ingest_py, py::arg("manifest"), py::arg("out"), py::arg("dictionary") = std::nullopt,
        py::arg("bins") = 8, py::arg("tokens") = 100, py::arg("seed") = 42);
  m.def("train", &train_py, py::arg("corpus"), py::arg("out"), py::arg("k") = 12,
        py::arg("alpha") = std::vector<double>{}, py::arg("eta") = 0.1, py::arg("sweeps") = 1000,
        py::arg("burn_in") = 200, py::arg("seed") = 42, py::arg("restarts") = 1, py::arg("confidence") = 0.95);
  m.def("t_quantile", &t_quantile, py::arg("df"), py::arg("p"));
  m.def("t_cdf", &t_cdf, py::arg("t"), py::arg("df"));
  m.def("pooled_t_test", &pooled_t_test_py, py::arg("n_a"), py::arg("mean_a"), py::arg("var_a"), py::arg("n_b"),
        py::arg("mean_b"), py::arg("var_b"), py::arg("confidence") = 0.95);
  m.def("rgb_to_hsv", [](std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    Hsv h = rgb_to_hsv(r, g, b);
    return py::make_tuple(h.h, h.s, h.v);
  }, py::arg("r"), py::arg("g"), py::arg("b"));
  m.def("kmeans", &kmeans_py, py::arg("points"), py::arg("k"), py::arg("seed") = 42, py::arg("restarts") = 10,
        py::arg("max_iterations") = 100);
  m.def("singular_values", &singular_values_py, py::arg("matrix"));
}

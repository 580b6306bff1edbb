#include "viralens/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

namespace viralens::report {

namespace {

std::string fixed(double v, int digits) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

std::string cell(const std::optional<PairwiseTestResult>& t) {
  if (!t) return "";
  return "(" + compact_number(t->t_stat, 2) + ", " + compact_number(t->t_crit, 2) + ")" + (t->significant ? "*" : "");
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string opt(const std::optional<double>& v, int digits) { return v ? fixed(*v, digits) : "NA"; }

}  // namespace

std::string compact_number(double value, int digits) {
  std::string s = fixed(value, digits);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

json score_json(const ModelArchive& archive, const ScoreReport& r) {
  json theta = json::array();
  for (std::size_t k = 0; k < r.theta.size(); ++k)
    theta.push_back({{"cluster", k}, {"label", k < r.labels.size() ? r.labels[k] : ""}, {"probability", r.theta[k]}});
  return {{"theta", std::move(theta)},
          {"expected_activity", r.expected_activity},
          {"viral_probability", r.viral_probability},
          {"model_version", model_version(archive)}};
}

json compare_json(const ModelArchive& archive, const CompareReport& r) {
  json delta = json::array();
  for (std::size_t k = 0; k < r.delta_theta.size(); ++k)
    delta.push_back({{"cluster", k}, {"label", k < r.a.labels.size() ? r.a.labels[k] : ""}, {"delta", r.delta_theta[k]}});
  return {{"a", score_json(archive, r.a)},
          {"b", score_json(archive, r.b)},
          {"delta",
           {{"theta", std::move(delta)},
            {"expected_activity", r.delta_expected_activity},
            {"viral_probability", r.delta_viral_probability}}},
          {"model_version", model_version(archive)}};
}

json clusters_json(const ModelArchive& archive) {
  json out = json::array();
  for (std::size_t k = 0; k < archive.cluster_stats.size(); ++k) {
    const auto& c = archive.cluster_stats[k];
    out.push_back({{"cluster", k},
                   {"label", archive.labels[k]},
                   {"frequency", c.frequency},
                   {"average", c.mean ? json(*c.mean) : json(nullptr)},
                   {"variance", c.variance ? json(*c.variance) : json(nullptr)},
                   {"viral", archive.viral.contains(static_cast<std::uint32_t>(k))}});
  }
  return out;
}

std::string score_text(const ScoreReport& r) {
  std::ostringstream ss;
  ss << std::left << std::setw(8) << "cluster" << std::setw(40) << "label" << std::right << std::setw(12)
     << "probability" << std::setw(16) << "contribution" << "  viral\n";
  for (std::size_t k = 0; k < r.theta.size(); ++k) {
    ss << std::left << std::setw(8) << (k + 1) << std::setw(40) << (k < r.labels.size() ? r.labels[k] : "")
       << std::right << std::setw(12) << fixed(r.theta[k], 4) << std::setw(16) << fixed(r.contributions[k], 2)
       << (r.viral[k] ? "  *" : "") << "\n";
  }
  ss << "expected activity:  " << fixed(r.expected_activity, 2) << "\n";
  ss << "viral probability:  " << fixed(r.viral_probability, 4) << "\n";
  if (r.dropped_tokens) ss << "dropped tokens:     " << r.dropped_tokens << "\n";
  return ss.str();
}

std::string compare_text(const CompareReport& r) {
  std::ostringstream ss;
  ss << std::left << std::setw(8) << "cluster" << std::setw(40) << "label" << std::right << std::setw(10) << "A"
     << std::setw(10) << "B" << std::setw(11) << "B - A" << "\n";
  for (std::size_t k = 0; k < r.delta_theta.size(); ++k) {
    ss << std::left << std::setw(8) << (k + 1) << std::setw(40) << (k < r.a.labels.size() ? r.a.labels[k] : "")
       << std::right << std::setw(10) << fixed(r.a.theta[k], 4) << std::setw(10) << fixed(r.b.theta[k], 4)
       << std::setw(11) << std::showpos << fixed(r.delta_theta[k], 4) << std::noshowpos << "\n";
  }
  ss << "expected activity:  " << fixed(r.a.expected_activity, 2) << " -> " << fixed(r.b.expected_activity, 2)
     << " (" << (r.delta_expected_activity >= 0 ? "+" : "") << fixed(r.delta_expected_activity, 2) << ")\n";
  ss << "viral probability:  " << fixed(r.a.viral_probability, 4) << " -> " << fixed(r.b.viral_probability, 4)
     << " (" << (r.delta_viral_probability >= 0 ? "+" : "") << fixed(r.delta_viral_probability, 4) << ")\n";
  return ss.str();
}

std::string table1_csv(const ClusterStats& stats) {
  std::ostringstream ss;
  ss << "cluster,label,frequency,average,variance\n";
  for (std::size_t k = 0; k < stats.size(); ++k) {
    const auto& c = stats[k];
    ss << (k + 1) << "," << csv_quote(c.label) << "," << c.frequency << "," << opt(c.mean, 4) << ","
       << opt(c.variance, 4) << "\n";
  }
  return ss.str();
}

std::string table1_text(const ClusterStats& stats) {
  std::size_t width = 12;
  for (const auto& c : stats.clusters) width = std::max(width, c.label.size() + 2);
  std::ostringstream ss;
  ss << std::left << std::setw(9) << "Cluster" << std::setw(static_cast<int>(width)) << "Name" << std::right
     << std::setw(10) << "Frequency" << std::setw(14) << "Average" << std::setw(18) << "Variance" << "\n";
  for (std::size_t k = 0; k < stats.size(); ++k) {
    const auto& c = stats[k];
    ss << std::left << std::setw(9) << (k + 1) << std::setw(static_cast<int>(width)) << c.label << std::right
       << std::setw(10) << c.frequency << std::setw(14) << opt(c.mean, 3) << std::setw(18) << opt(c.variance, 1)
       << "\n";
  }
  return ss.str();
}

std::string table2_csv(const PairwiseMatrix& tests) {
  std::ostringstream ss;
  ss << "cluster_a,cluster_b,t_stat,df,t_crit,significant\n";
  for (std::size_t i = 0; i < tests.size(); ++i) {
    for (std::size_t j = i + 1; j < tests.size(); ++j) {
      const auto& t = tests.at(i, j);
      ss << (i + 1) << "," << (j + 1) << ",";
      if (t) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.6f,%d,%.6f,%s", t->t_stat, t->df, t->t_crit, t->significant ? "true" : "false");
        ss << buf;
      } else {
        ss << ",,,";
      }
      ss << "\n";
    }
  }
  return ss.str();
}

std::string table2_text(const PairwiseMatrix& tests) {
  const std::size_t n = tests.size();
  std::ostringstream ss;
  constexpr int w = 16;
  ss << std::setw(11) << "";
  for (std::size_t j = 1; j < n; ++j) ss << std::setw(w) << ("Cluster " + std::to_string(j + 1));
  ss << "\n";
  for (std::size_t i = 0; i + 1 < n; ++i) {
    ss << std::left << std::setw(11) << ("Cluster " + std::to_string(i + 1)) << std::right;
    for (std::size_t j = 1; j < n; ++j) ss << std::setw(w) << (j > i ? cell(tests.at(i, j)) : "");
    ss << "\n";
  }
  ss << "* |t| exceeds the two-tailed critical value; no multiple-comparison correction applied.\n";
  return ss.str();
}

json tables_json(const ClusterStats& stats, const PairwiseMatrix& tests) {
  json t1 = json::array();
  for (std::size_t k = 0; k < stats.size(); ++k) {
    const auto& c = stats[k];
    t1.push_back({{"cluster", k},
                  {"label", c.label},
                  {"frequency", c.frequency},
                  {"average", c.mean ? json(*c.mean) : json(nullptr)},
                  {"variance", c.variance ? json(*c.variance) : json(nullptr)}});
  }
  json t2 = json::array();
  for (std::size_t i = 0; i < tests.size(); ++i) {
    for (std::size_t j = i + 1; j < tests.size(); ++j) {
      const auto& t = tests.at(i, j);
      json e = {{"cluster_a", i}, {"cluster_b", j}};
      if (t) {
        e["t_stat"] = t->t_stat;
        e["df"] = t->df;
        e["t_crit"] = t->t_crit;
        e["significant"] = t->significant;
      } else {
        e["t_stat"] = nullptr;
      }
      t2.push_back(std::move(e));
    }
  }
  return {{"cluster_stats", std::move(t1)}, {"pairwise_tests", std::move(t2)}, {"multiple_comparison_correction", "none"}};
}

}  // namespace viralens::report

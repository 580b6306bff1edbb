#pragma once

#include <string>

#include "json.hpp"

#include "viralens/dss.hpp"

namespace viralens::report {

using json = nlohmann::json;

// JSON bodies. Cluster indices are 0-based; human-readable tables number
// clusters from 1.
json score_json(const ModelArchive& archive, const ScoreReport& report);
json compare_json(const ModelArchive& archive, const CompareReport& report);
json clusters_json(const ModelArchive& archive);

std::string score_text(const ScoreReport& report);
std::string compare_text(const CompareReport& report);

/// Cluster statistics table: id, label, frequency, average, variance.
std::string table1_csv(const ClusterStats& stats);
std::string table1_text(const ClusterStats& stats);
/// Pairwise tests as "(t, crit)" cells with '*' marking significance.
std::string table2_csv(const PairwiseMatrix& tests);
std::string table2_text(const PairwiseMatrix& tests);
json tables_json(const ClusterStats& stats, const PairwiseMatrix& tests);

/// Formats with up to `digits` decimals, trailing zeros removed ("2.00" -> "2").
std::string compact_number(double value, int digits);

}  // namespace viralens::report

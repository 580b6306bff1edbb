#include <fstream>

#include "doctest.h"
#include "support/fixture_model.hpp"
#include "support/paper_tables.hpp"
#include "viralens/dss.hpp"
#include "viralens/report.hpp"

using namespace viralens;

TEST_CASE("viral set from the paper's tables") {
  const auto stats = fixtures::table1_stats();
  const auto tests = pairwise_matrix(stats);
  const auto v = derive_viral_set(stats, tests);
  CHECK(v.clusters == std::vector<std::uint32_t>{0, 4});
  CHECK(v.rule == "significant-positive");

  ClusterStats flat;
  for (int i = 0; i < 3; ++i) flat.clusters.push_back({10, 5.0, 4.0, ""});
  CHECK(derive_viral_set(flat, pairwise_matrix(flat)).clusters.empty());

  const auto o = derive_viral_set(stats, tests, std::vector<std::uint32_t>{3});
  CHECK(o.clusters == std::vector<std::uint32_t>{3});
  CHECK(o.rule == "explicit");
  CHECK_THROWS_AS(derive_viral_set(stats, tests, std::vector<std::uint32_t>{12}), Error);
}

TEST_CASE("expected activity") {
  const auto stats = fixtures::table1_stats();
  std::vector<double> one_hot(12, 0.0);
  one_hot[0] = 1.0;
  CHECK(expected_activity(one_hot, stats) == 2303.143);
  CHECK(expected_activity(std::vector<double>(12, 1.0 / 12), stats) == doctest::Approx(1422.25).epsilon(1e-5));

  ClusterStats two;
  two.clusters = {{1, 10.0, std::nullopt, ""}, {1, 20.0, std::nullopt, ""}};
  CHECK(expected_activity(std::vector<double>{0.5, 0.5}, two) == 15.0);

  ClusterStats gap;
  gap.clusters = {{1, 10.0, std::nullopt, ""}, {0, std::nullopt, std::nullopt, ""}};
  CHECK(expected_activity(std::vector<double>{1.0, 0.0}, gap) == 10.0);
  try {
    expected_activity(std::vector<double>{0.5, 0.5}, gap);
    FAIL("expected a compute error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Compute);
    CHECK(std::string(e.what()).find("cluster 1") != std::string::npos);
  }
  CHECK_THROWS_AS(expected_activity(std::vector<double>{1.0}, two), Error);
}

TEST_CASE("scoring constructed documents") {
  const auto a = fixtures::toy_archive();
  const std::vector<TermCount> high = {{2, 6}, {3, 6}};
  const auto r = score_document(a, high);
  CHECK(r.theta[1] > 0.9);
  CHECK(r.theta[0] + r.theta[1] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.viral_probability == doctest::Approx(r.theta[1]));
  CHECK(r.expected_activity >= 10.0);
  CHECK(r.expected_activity <= 20.0);
  CHECK(r.expected_activity == doctest::Approx(r.contributions[0] + r.contributions[1]));
  CHECK(r.labels == std::vector<std::string>{"low", "high"});
  CHECK(r.viral == std::vector<bool>{false, true});

  auto none = a;
  none.viral.clusters.clear();
  CHECK(score_document(none, high).viral_probability == 0.0);

  auto all = a;
  all.viral.clusters = {0, 1};
  CHECK(score_document(all, high).viral_probability == doctest::Approx(1.0));

  const auto again = score_document(a, high);
  CHECK(again.theta == r.theta);
}

TEST_CASE("compare arithmetic") {
  ScoreReport a, b;
  a.theta = {0.8, 0.2};
  a.viral_probability = 0.2;
  a.expected_activity = 12;
  b.theta = {0.5, 0.5};
  b.viral_probability = 0.5;
  b.expected_activity = 15;
  const auto ab = compare_reports(a, b);
  CHECK(ab.delta_viral_probability == doctest::Approx(0.3));
  CHECK(ab.delta_expected_activity == 3.0);
  const auto ba = compare_reports(b, a);
  CHECK(ba.delta_theta[0] == -ab.delta_theta[0]);
  CHECK(ba.delta_viral_probability == -ab.delta_viral_probability);
}

TEST_CASE("scoring images through the fixture model") {
  const auto& fm = fixtures::fixture_model();
  const auto img_a = fixtures::fixture_png(0, 123);
  const auto img_b = fixtures::fixture_png(2, 456);
  const auto r = score(fm.archive, img_a);
  REQUIRE(r.theta.size() == 4);
  double sum = 0.0;
  for (double t : r.theta) sum += t;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.descriptor.has_value());
  const auto again = score(fm.archive, img_a);
  CHECK(again.theta == r.theta);
  CHECK(again.expected_activity == r.expected_activity);

  const auto same = compare(fm.archive, img_a, img_a);
  for (double d : same.delta_theta) CHECK(d == 0.0);
  CHECK(same.delta_expected_activity == 0.0);

  const auto ab = compare(fm.archive, img_a, img_b), ba = compare(fm.archive, img_b, img_a);
  for (std::size_t k = 0; k < 4; ++k) CHECK(ab.delta_theta[k] == -ba.delta_theta[k]);
  CHECK(ab.delta_viral_probability == -ba.delta_viral_probability);
}

TEST_CASE("scoring errors carry the stage and variant") {
  const auto& fm = fixtures::fixture_model();
  const std::vector<std::uint8_t> junk = {0x89, 'P', 'N', 'G', 0, 0};
  try {
    score(fm.archive, junk);
    FAIL("expected a scoring error");
  } catch (const ScoringError& e) {
    CHECK(e.stage() == "decode");
    CHECK(e.variant().empty());
  }
  try {
    compare(fm.archive, fixtures::fixture_png(0, 1), junk);
    FAIL("expected a scoring error");
  } catch (const ScoringError& e) {
    CHECK(e.stage() == "decode");
    CHECK(e.variant() == "b");
    CHECK(std::string(e.what()).find("variant b") != std::string::npos);
  }
}

TEST_CASE("archive round trip") {
  const auto& fm = fixtures::fixture_model();
  const auto text = archive_to_string(fm.archive);
  const auto back = archive_from_string(text);
  CHECK(back.lda.phi == fm.archive.lda.phi);
  CHECK(back.lda.alpha == fm.archive.lda.alpha);
  CHECK(back.lda.vocabulary == fm.archive.lda.vocabulary);
  CHECK(back.fold_in_seed == fm.archive.fold_in_seed);
  CHECK(back.viral.clusters == fm.archive.viral.clusters);
  CHECK(back.labels == fm.archive.labels);
  CHECK(archive_to_string(back) == text);
  CHECK(model_version(back) == model_version(fm.archive));

  const auto path = fixtures::scratch_dir("archive") + "/m.json";
  save_archive(fm.archive, path);
  CHECK(archive_to_string(load_archive(path)) == text);

  auto j = nlohmann::json::parse(text);
  j["format_version"] = 99;
  try {
    archive_from_string(j.dump());
    FAIL("expected a format error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Format);
  }
  CHECK_THROWS_AS(archive_from_string("{"), Error);
  j = nlohmann::json::parse(text);
  j["vocabulary"].erase(0);
  CHECK_THROWS_AS(archive_from_string(j.dump()), Error);
  CHECK_THROWS_AS(load_archive("/nonexistent/m.json"), Error);
}

TEST_CASE("report rendering") {
  const auto stats = fixtures::table1_stats();
  const auto tests = pairwise_matrix(stats);
  const auto t2 = report::table2_text(tests);
  CHECK(t2.find("(2.3, 2)*") != std::string::npos);
  CHECK(t2.find("(-2.1, 2.02)*") != std::string::npos);
  CHECK(t2.find("(-0.49, 2)") != std::string::npos);
  CHECK(t2.find("multiple") != std::string::npos);
  const auto t1 = report::table1_csv(stats);
  CHECK(t1.find("2303.143") != std::string::npos);
  CHECK(report::compact_number(2.0032, 2) == "2");
  CHECK(report::compact_number(-0.004, 2) == "0");

  const auto& fm = fixtures::fixture_model();
  const auto clusters = report::clusters_json(fm.archive);
  CHECK(clusters.size() == 4);
  for (const auto& c : clusters)
    for (const char* key : {"cluster", "label", "frequency", "average", "variance", "viral"}) CHECK(c.contains(key));

  const auto r = score(fm.archive, fixtures::fixture_png(1, 5));
  const auto j = report::score_json(fm.archive, r);
  CHECK(j.at("theta").size() == 4);
  CHECK(j.at("model_version") == model_version(fm.archive));
  CHECK(!report::score_text(r).empty());
}

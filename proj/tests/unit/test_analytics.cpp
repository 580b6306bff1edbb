#include <cmath>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "doctest.h"
#include "support/paper_tables.hpp"
#include "viralens/analytics.hpp"
#include "viralens/error.hpp"

using namespace viralens;

TEST_CASE("hard assignment takes the argmax, ties low") {
  Eigen::MatrixXd theta(3, 2);
  theta << 0.7, 0.3,  //
      0.5, 0.5,       //
      0.2, 0.8;
  CHECK(cluster_assign(theta) == std::vector<std::uint32_t>{0, 0, 1});
  Eigen::MatrixXd swapped = theta.rowwise().reverse();
  swapped(1, 0) = 0.4;  // break the tie so equivariance is well defined
  swapped(1, 1) = 0.6;
  theta(1, 0) = 0.6;
  theta(1, 1) = 0.4;
  const auto a = cluster_assign(theta), b = cluster_assign(swapped);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == 1 - a[i]);
}

TEST_CASE("cluster statistics") {
  const std::vector<std::uint32_t> assign = {0, 0, 0, 1};
  const std::vector<double> act = {1, 2, 3, 5};
  const auto s = cluster_stats(assign, act, 3);
  CHECK(s[0].frequency == 3);
  CHECK(*s[0].mean == 2.0);
  CHECK(*s[0].variance == 1.0);
  CHECK(s[1].frequency == 1);
  CHECK(*s[1].mean == 5.0);
  CHECK(!s[1].variance);
  CHECK(s[2].frequency == 0);
  CHECK(!s[2].mean);
  CHECK(!s[2].variance);

  std::vector<std::uint32_t> twice = assign;
  twice.insert(twice.end(), assign.begin(), assign.end());
  std::vector<double> act2 = act;
  act2.insert(act2.end(), act.begin(), act.end());
  const auto d = cluster_stats(twice, act2, 3);
  CHECK(d[0].frequency == 6);
  CHECK(*d[0].mean == 2.0);

  CHECK_THROWS_AS(cluster_stats(assign, act, 1), Error);
  CHECK_THROWS_AS(cluster_stats(assign, std::vector<double>{1.0}, 3), Error);
}

TEST_CASE("t quantile against worked values and boost") {
  CHECK(t_quantile(56, 0.975) == doctest::Approx(2.0032).epsilon(0.0005));
  CHECK(t_quantile(35, 0.975) == doctest::Approx(2.0301).epsilon(0.0005));
  CHECK(t_quantile(79, 0.975) == doctest::Approx(1.9905).epsilon(0.0005));
  CHECK(std::abs(t_quantile(1e6, 0.975) - 1.96) < 0.001);
  CHECK(t_quantile(1, 0.975) == doctest::Approx(12.7062).epsilon(1e-5));
  CHECK(t_quantile(10, 0.5) == 0.0);
  CHECK(t_quantile(10, 0.025) == doctest::Approx(-t_quantile(10, 0.975)));

  for (int df : {1, 2, 3, 5, 8, 13, 22, 37, 52, 67, 120, 1000})
    for (double p : {0.6, 0.9, 0.95, 0.975, 0.995, 0.9995}) {
      const double ref = boost::math::quantile(boost::math::students_t(df), p);
      CHECK(std::abs(t_quantile(df, p) - ref) <= 1e-6);
    }

  CHECK_THROWS_AS(t_quantile(0, 0.9), Error);
  CHECK_THROWS_AS(t_quantile(5, 1.0), Error);
  CHECK_THROWS_AS(t_quantile(5, 0.0), Error);
}

TEST_CASE("incomplete beta against boost") {
  for (double a : {0.5, 1.0, 2.5, 11.0, 40.0})
    for (double b : {0.5, 1.0, 3.0, 26.0})
      for (double x : {0.0, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0})
        CHECK(incomplete_beta(a, b, x) == doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-12));
}

TEST_CASE("pooled t-test worked examples") {
  const auto r = pooled_t_test({28, 2303.143, 8744003}, {30, 923.5333, 1904941});
  REQUIRE(r);
  CHECK(std::abs(r->t_stat - 2.30) <= 0.01);
  CHECK(r->df == 56);
  CHECK(std::abs(r->t_crit - 2.00) <= 0.01);
  CHECK(r->significant);

  const auto s = pooled_t_test({9, 446.6667, 350812.4}, {31, 2693.032, 10011501});
  REQUIRE(s);
  CHECK(std::abs(s->t_stat + 2.10) <= 0.01);
  CHECK(std::abs(s->t_crit - 2.02) <= 0.01);
  CHECK(s->significant);

  const auto same = pooled_t_test({10, 5, 2}, {10, 5, 2});
  CHECK(same->t_stat == 0.0);
  CHECK(!same->significant);

  CHECK(!pooled_t_test({1, 5, 0}, {1, 6, 0}));
  CHECK(!pooled_t_test({3, 5, 0}, {4, 6, 0}));
  CHECK(pooled_t_test({1, 5, 0}, {2, 6, 1}));
}

TEST_CASE("t-test symmetries") {
  const GroupSummary a{12, 40.0, 9.0}, b{17, 35.0, 16.0};
  const auto ab = *pooled_t_test(a, b), ba = *pooled_t_test(b, a);
  CHECK(ab.t_stat == -ba.t_stat);
  CHECK(ab.df == ba.df);
  for (double c : {0.5, 2.0, 10.0}) {
    const auto scaled = *pooled_t_test({a.n, a.mean * c, a.variance * c * c}, {b.n, b.mean * c, b.variance * c * c});
    CHECK(scaled.t_stat == doctest::Approx(ab.t_stat).epsilon(1e-12));
    const auto shifted = *pooled_t_test({a.n, a.mean + c * 100, a.variance}, {b.n, b.mean + c * 100, b.variance});
    CHECK(shifted.t_stat == doctest::Approx(ab.t_stat).epsilon(1e-12));
  }
}

TEST_CASE("pairwise matrix over the paper's table") {
  const auto tests = pairwise_matrix(fixtures::table1_stats());
  CHECK(tests.pair_count() == 66);
  int defined = 0;
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = i + 1; j < 12; ++j) defined += tests.at(i, j).has_value();
  CHECK(defined == 66);
  int t_hits = 0;
  for (const auto& c : fixtures::kTable2)
    t_hits += std::abs(tests.at(static_cast<std::size_t>(c.i - 1), static_cast<std::size_t>(c.j - 1))->t_stat - c.t) <= 0.015;
  CHECK(t_hits == 66);

  ClusterStats partial = fixtures::table1_stats();
  partial.clusters[2].variance.reset();
  const auto p = pairwise_matrix(partial);
  CHECK(!p.at(0, 2));
  CHECK(!p.at(2, 5));
  CHECK(p.at(0, 1));
}

TEST_CASE("word cloud terms") {
  const auto top = word_cloud_terms({{"mobile apps", "mobile design"}, {"a b c"}, {"the the x"}, {}}, 2);
  CHECK(top[0][0] == TermFrequency{"mobile", 2});
  CHECK(top[1] == std::vector<TermFrequency>{{"a", 1}, {"b", 1}});
  CHECK(top[2][0] == TermFrequency{"the", 2});
  CHECK(top[3].empty());
  CHECK(title_terms("Cool, Infographics!") == std::vector<std::string>{"cool", "infographics"});
}

#include <algorithm>
#include <numeric>
#include <random>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "doctest.h"
#include "support/fixture_corpus.hpp"
#include "support/oracles.hpp"
#include "viralens/error.hpp"
#include "viralens/vision.hpp"

using namespace viralens;

namespace {

PixelGrid grid_of(int w, int h, const std::vector<Rgb>& px) { return PixelGrid(w, h, px); }

std::vector<std::uint8_t> encode(const cv::Mat& m, const char* ext = ".png") {
  std::vector<std::uint8_t> out;
  cv::imencode(ext, m, out);
  return out;
}

}  // namespace

TEST_CASE("hsv fixed conversions") {
  const Hsv red = rgb_to_hsv(255, 0, 0);
  CHECK(red.h == 0.0);
  CHECK(red.s == 1.0);
  CHECK(red.v == 1.0);
  const Hsv black = rgb_to_hsv(0, 0, 0);
  CHECK((black.h == 0.0 && black.s == 0.0 && black.v == 0.0));
  const Hsv gray = rgb_to_hsv(128, 128, 128);
  CHECK((gray.h == 0.0 && gray.s == 0.0));
  CHECK(gray.v == 128.0 / 255.0);
  CHECK(rgb_to_hsv(0, 255, 0).h == doctest::Approx(120.0));
  CHECK(rgb_to_hsv(0, 0, 255).h == doctest::Approx(240.0));
  CHECK(rgb_to_hsv(255, 0, 255).h == doctest::Approx(300.0));
}

TEST_CASE("hsv hue stays in [0, 360)") {
  for (int r = 0; r < 256; r += 15)
    for (int g = 0; g < 256; g += 15)
      for (int b = 0; b < 256; b += 15) {
        const Hsv h = rgb_to_hsv(static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b));
        REQUIRE(h.h >= 0.0);
        REQUIRE(h.h < 360.0);
        if (r == g && g == b) REQUIRE(h.h == 0.0);
      }
}

TEST_CASE("kmeans separable 1-d example") {
  const auto r = kmeans(PointSet(1, {0, 0, 10, 10}), 2, 1);
  std::vector<double> centers = {r.centers[0][0], r.centers[1][0]};
  std::sort(centers.begin(), centers.end());
  CHECK(centers == std::vector<double>{0, 10});
  CHECK(r.inertia == 0.0);
  CHECK(r.assignment[0] == r.assignment[1]);
  CHECK(r.assignment[0] != r.assignment[2]);
}

TEST_CASE("kmeans with k=1 returns the mean") {
  const auto r = kmeans(PointSet(2, {1, 2, 3, 4, 5, 9}), 1, 3);
  CHECK(r.centers[0][0] == doctest::Approx(3.0));
  CHECK(r.centers[0][1] == doctest::Approx(5.0));
  CHECK(std::all_of(r.assignment.begin(), r.assignment.end(), [](auto a) { return a == 0; }));
}

TEST_CASE("kmeans on six random points matches the best 2-partition") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int inst = 0; inst < 20; ++inst) {
    std::vector<std::vector<double>> pts(6, std::vector<double>(2));
    std::vector<double> flat;
    for (auto& p : pts) {
      p = {u(gen), u(gen)};
      flat.insert(flat.end(), p.begin(), p.end());
    }
    const auto r = kmeans(PointSet(2, flat), 2, static_cast<std::uint64_t>(inst));
    CHECK(r.inertia == doctest::Approx(oracle::best_partition_inertia(pts, 2)).epsilon(1e-12));
  }
}

TEST_CASE("kmeans reduces k to the number of distinct points") {
  const auto r = kmeans(PointSet(1, {4, 4, 4, 7}), 5, 0);
  CHECK(r.effective_k == 2);
  CHECK(r.centers.size() == 2);
  CHECK(r.inertia == 0.0);
}

TEST_CASE("kmeans is deterministic and rejects bad input") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> g;
  std::vector<double> coords(300);
  for (auto& c : coords) c = g(gen);
  const auto a = kmeans(PointSet(3, coords), 4, 9);
  const auto b = kmeans(PointSet(3, coords), 4, 9);
  CHECK(a.assignment == b.assignment);
  CHECK(std::equal(a.centers.coords().begin(), a.centers.coords().end(), b.centers.coords().begin()));
  CHECK(a.inertia == b.inertia);

  CHECK_THROWS_AS(kmeans(PointSet(2, {}), 2, 0), Error);
  CHECK_THROWS_AS(kmeans(PointSet(1, {1.0}), 0, 0), Error);
}

TEST_CASE("solid image gives one real cluster and padding") {
  const auto d = extract_visual_descriptor(grid_of(4, 4, std::vector<Rgb>(16, {10, 200, 30})), 1);
  CHECK(d.real_clusters == 1);
  CHECK(d.clusters[0].density == 1.0);
  for (std::size_t i = 1; i < kDescriptorClusters; ++i) {
    CHECK(d.clusters[i].density == 0.0);
    CHECK(d.clusters[i].mean == d.clusters[0].mean);
  }
  CHECK(d.clusters[0].mean[1] == doctest::Approx(200.0 / 255.0));
}

TEST_CASE("60/40 red and blue image") {
  std::vector<Rgb> px;
  for (int i = 0; i < 60; ++i) px.push_back({255, 0, 0});
  for (int i = 0; i < 40; ++i) px.push_back({0, 0, 255});
  const auto d = extract_visual_descriptor(grid_of(10, 10, px), 5);
  CHECK(d.clusters[0].density == doctest::Approx(0.6));
  CHECK(d.clusters[1].density == doctest::Approx(0.4));
  CHECK(d.clusters[0].mean[0] == 1.0);
  CHECK(d.clusters[0].mean[1] == 0.0);
  CHECK(d.clusters[0].mean[2] == 0.0);
  CHECK(d.clusters[1].mean[3] == doctest::Approx(240.0 / 360.0));

  const auto bag = quantize_to_visual_words(d, {});
  CHECK(bag.counts[0 * 8 + 7] == 60);  // R, bin 7
  CHECK(bag.counts[0 * 8 + 0] == 40);  // blue pixels carry no red
  for (std::size_t c = 0; c < kColorChannels; ++c) CHECK(bag.channel_total(c) == 100);
}

TEST_CASE("descriptor densities are sorted and sum to one") {
  std::mt19937 gen(4);
  std::uniform_int_distribution<int> u(0, 255);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Rgb> px(30 * 20);
    for (auto& p : px) p = {static_cast<std::uint8_t>(u(gen)), static_cast<std::uint8_t>(u(gen)), static_cast<std::uint8_t>(u(gen))};
    const auto d = extract_visual_descriptor(grid_of(30, 20, px), static_cast<std::uint64_t>(trial));
    double sum = 0.0;
    for (std::size_t i = 0; i < kDescriptorClusters; ++i) {
      sum += d.clusters[i].density;
      if (i) CHECK(d.clusters[i].density <= d.clusters[i - 1].density);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    const QuantizationConfig cfg{8, 100};
    const auto bag = quantize_to_visual_words(d, cfg);
    for (std::size_t c = 0; c < kColorChannels; ++c) {
      CHECK(bag.channel_total(c) >= 95);
      CHECK(bag.channel_total(c) <= 105);
    }
  }
}

TEST_CASE("subsampling cap bounds the clustered pixels") {
  std::vector<Rgb> px(100 * 100);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = i % 3 ? Rgb{255, 255, 255} : Rgb{0, 0, 0};
  ExtractionOptions opts;
  opts.subsample_cap = 500;
  const auto d = extract_visual_descriptor(grid_of(100, 100, px), 2, opts);
  CHECK(d.real_clusters == 2);
  CHECK(d.clusters[0].density == doctest::Approx(2.0 / 3.0).epsilon(0.08));
  const auto again = extract_visual_descriptor(grid_of(100, 100, px), 2, opts);
  CHECK(again.clusters[0].density == d.clusters[0].density);
}

TEST_CASE("quantization rules") {
  VisualDescriptor d;
  d.clusters[0].density = 1.0;
  d.clusters[0].mean = {1.0, 0.5, 0.0, 0.999, 0.124, 0.125};
  d.real_clusters = 1;
  const auto bag = quantize_to_visual_words(d, {8, 100});
  CHECK(bag.counts.size() == 48);
  CHECK(bag.counts[0 * 8 + 7] == 100);  // 1.0 clamps into the top bin
  CHECK(bag.counts[1 * 8 + 4] == 100);
  CHECK(bag.counts[2 * 8 + 0] == 100);
  CHECK(bag.counts[3 * 8 + 7] == 100);
  CHECK(bag.counts[4 * 8 + 0] == 100);
  CHECK(bag.counts[5 * 8 + 1] == 100);
  CHECK(bag.total() == 600);

  const auto names = visual_vocabulary({8, 100});
  CHECK(names.size() == 48);
  CHECK(names.front() == "R:0");
  CHECK(names.back() == "V:7");

  CHECK_THROWS_AS(QuantizationConfig({0, 100}).validate(), Error);
  CHECK_THROWS_AS(QuantizationConfig({8, 0}).validate(), Error);
}

TEST_CASE("decode png, jpeg, gray and alpha") {
  const auto png = fixtures::fixture_png(1, 3);
  const auto g = decode_image(png);
  CHECK(g.width() == 64);
  CHECK(g.height() == 48);

  cv::Mat bgr(2, 3, CV_8UC3, cv::Scalar(255, 0, 0));  // blue in OpenCV order
  const auto blue = decode_image(encode(bgr));
  CHECK(blue.at(2, 1) == Rgb{0, 0, 255});

  const auto jpg = decode_image(encode(cv::Mat(8, 8, CV_8UC3, cv::Scalar(0, 0, 200)), ".jpg"));
  CHECK(jpg.at(0, 0).r > 190);

  const auto gray = decode_image(encode(cv::Mat(2, 2, CV_8UC1, cv::Scalar(77))));
  CHECK(gray.at(1, 1) == Rgb{77, 77, 77});

  cv::Mat rgba(2, 2, CV_8UC4, cv::Scalar(0, 0, 0, 0));  // fully transparent black
  rgba.at<cv::Vec4b>(0, 0) = {0, 0, 255, 255};
  const auto comp = decode_image(encode(rgba));
  CHECK(comp.at(1, 1) == Rgb{255, 255, 255});
  CHECK(comp.at(0, 0) == Rgb{255, 0, 0});

  cv::Mat deep(2, 2, CV_16UC3, cv::Scalar(65535, 0, 0));
  CHECK(decode_image(encode(deep)).at(0, 0) == Rgb{0, 0, 255});
}

TEST_CASE("decode rejects garbage") {
  const std::vector<std::uint8_t> junk = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK_THROWS_AS(decode_image(junk), Error);
  CHECK_THROWS_AS(decode_image(std::vector<std::uint8_t>{}), Error);
  std::vector<std::uint8_t> truncated = fixtures::fixture_png(0, 1);
  truncated.resize(30);
  try {
    decode_image(truncated);
    FAIL("expected a decode error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Decode);
  }
  CHECK_THROWS_AS(read_image_file("/nonexistent/x.png"), Error);
}

TEST_CASE("pixel grid validates its shape") {
  CHECK_THROWS_AS(PixelGrid(2, 2, std::vector<Rgb>(3)), Error);
  CHECK_THROWS_AS(PixelGrid(0, 2, {}), Error);
}

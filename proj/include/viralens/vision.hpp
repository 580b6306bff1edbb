#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace viralens {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Decoded image, row-major, alpha already composited over white.
class PixelGrid {
 public:
  PixelGrid(int width, int height, std::vector<Rgb> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  const Rgb& at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const Rgb> pixels() const noexcept { return pixels_; }

 private:
  int width_;
  int height_;
  std::vector<Rgb> pixels_;
};

/// Decodes a PNG or JPEG stream. Throws Error{Decode} on anything else.
PixelGrid decode_image(std::span<const std::uint8_t> bytes);
PixelGrid read_image_file(const std::string& path);

struct Hsv {
  double h = 0.0;  // degrees, [0, 360)
  double s = 0.0;  // [0, 1]
  double v = 0.0;  // [0, 1]
};

Hsv rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;
/// Inverse of rgb_to_hsv, returning channels in [0, 255] (unrounded).
std::array<double, 3> hsv_to_rgb(const Hsv& hsv) noexcept;

// ---------------------------------------------------------------------------
// k-means

/// Row-major point set: size() points of dim() coordinates each.
class PointSet {
 public:
  PointSet(std::size_t dim, std::vector<double> coords);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ ? coords_.size() / dim_ : 0; }
  std::span<const double> operator[](std::size_t i) const noexcept {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<const double> coords() const noexcept { return coords_; }

 private:
  std::size_t dim_;
  std::vector<double> coords_;
};

struct KMeansOptions {
  int max_iterations = 100;
  /// Independent k-means++ seedings; the lowest-inertia run is returned.
  int restarts = 10;
};

struct KMeansResult {
  PointSet centers;
  std::vector<std::uint32_t> assignment;
  double inertia = 0.0;
  /// Inertia after each Lloyd iteration of the returned run.
  std::vector<double> inertia_trace;
  int iterations = 0;
  /// min(k, distinct points); centers has this many rows.
  std::size_t effective_k = 0;
};

/// Lloyd's algorithm from seeded k-means++ initialization. When k exceeds
/// the number of distinct points, min(k, distinct) clusters are returned.
KMeansResult kmeans(const PointSet& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {});

// ---------------------------------------------------------------------------
// Visual descriptor

inline constexpr std::size_t kDescriptorClusters = 5;
inline constexpr std::size_t kColorChannels = 6;  // R, G, B, H, S, V

/// Channel order used everywhere a 6-vector appears.
inline constexpr std::array<const char*, kColorChannels> kChannelNames = {"R", "G", "B", "H", "S", "V"};

struct ColorCluster {
  double density = 0.0;
  /// r, g, b, h/360, s, v, all in [0, 1].
  std::array<double, kColorChannels> mean{};
};

struct VisualDescriptor {
  /// Ordered by descending density.
  std::array<ColorCluster, kDescriptorClusters> clusters{};
  /// Number of clusters that came from k-means; the rest are padding.
  std::size_t real_clusters = 0;
};

struct ExtractionOptions {
  std::size_t subsample_cap = 50'000;
  KMeansOptions kmeans{100, 3};
};

VisualDescriptor extract_visual_descriptor(const PixelGrid& grid, std::uint64_t seed,
                                           const ExtractionOptions& options = {});

struct QuantizationConfig {
  int bins_per_channel = 8;
  int tokens_per_channel = 100;

  void validate() const;
  std::size_t vocabulary_size() const noexcept {
    return kColorChannels * static_cast<std::size_t>(bins_per_channel);
  }
};

/// Word counts over the 6*B visual vocabulary, indexed channel * B + bin.
struct VisualBag {
  int bins_per_channel = 0;
  std::vector<std::uint32_t> counts;

  std::uint64_t channel_total(std::size_t channel) const;
  std::uint64_t total() const;
};

VisualBag quantize_to_visual_words(const VisualDescriptor& desc, const QuantizationConfig& cfg);

/// Names of the visual vocabulary in column order, e.g. "R:0" .. "V:7".
std::vector<std::string> visual_vocabulary(const QuantizationConfig& cfg);

}  // namespace viralens

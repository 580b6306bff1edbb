#include "viralens/vision.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "viralens/error.hpp"
#include "viralens/rng.hpp"

namespace viralens {

PixelGrid::PixelGrid(int width, int height, std::vector<Rgb> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0) fail(ErrorKind::Argument, "pixel grid dimensions must be positive");
  if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    fail(ErrorKind::Argument, "pixel count does not match width x height");
}

namespace {

bool is_png(std::span<const std::uint8_t> b) {
  static constexpr std::uint8_t sig[] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  return b.size() >= sizeof sig && std::equal(std::begin(sig), std::end(sig), b.begin());
}

bool is_jpeg(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 0xff && b[1] == 0xd8 && b[2] == 0xff;
}

std::uint8_t over_white(int c, int alpha) {
  return static_cast<std::uint8_t>((c * alpha + 255 * (255 - alpha) + 127) / 255);
}

}  // namespace

PixelGrid decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) fail(ErrorKind::Decode, "empty image stream");
  if (!is_png(bytes) && !is_jpeg(bytes)) fail(ErrorKind::Decode, "unsupported image format (expected PNG or JPEG)");

  // imdecode does not write through the header Mat.
  const cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat img;
  try {
    img = cv::imdecode(raw, cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception& e) {
    fail(ErrorKind::Decode, std::string("corrupt image stream: ") + e.what());
  }
  if (img.empty()) fail(ErrorKind::Decode, "corrupt image stream");

  if (img.depth() == CV_16U) {
    img.convertTo(img, CV_8U, 1.0 / 257.0);
  } else if (img.depth() != CV_8U) {
    fail(ErrorKind::Decode, "unsupported pixel depth");
  }

  const int channels = img.channels();
  std::vector<Rgb> pixels;
  pixels.reserve(static_cast<std::size_t>(img.rows) * img.cols);
  for (int y = 0; y < img.rows; ++y) {
    const std::uint8_t* row = img.ptr<std::uint8_t>(y);
    for (int x = 0; x < img.cols; ++x) {
      const std::uint8_t* p = row + static_cast<std::ptrdiff_t>(x) * channels;
      switch (channels) {
        case 1:
          pixels.push_back({p[0], p[0], p[0]});
          break;
        case 2:
          pixels.push_back({over_white(p[0], p[1]), over_white(p[0], p[1]), over_white(p[0], p[1])});
          break;
        case 3:  // OpenCV channel order is BGR
          pixels.push_back({p[2], p[1], p[0]});
          break;
        case 4:
          pixels.push_back({over_white(p[2], p[3]), over_white(p[1], p[3]), over_white(p[0], p[3])});
          break;
        default:
          fail(ErrorKind::Decode, "unsupported channel count");
      }
    }
  }
  return PixelGrid(img.cols, img.rows, std::move(pixels));
}

PixelGrid read_image_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open image file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_image(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

Hsv rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) noexcept {
  const double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
  const double hi = std::max({r, g, b});
  const double lo = std::min({r, g, b});
  const double delta = hi - lo;

  Hsv out;
  out.v = hi;
  out.s = hi > 0.0 ? delta / hi : 0.0;
  if (delta <= 0.0) return out;  // achromatic: hue 0 by convention

  double h;
  if (hi == r) {
    h = 60.0 * std::fmod((g - b) / delta, 6.0);
  } else if (hi == g) {
    h = 60.0 * ((b - r) / delta + 2.0);
  } else {
    h = 60.0 * ((r - g) / delta + 4.0);
  }
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  out.h = h;
  return out;
}

std::array<double, 3> hsv_to_rgb(const Hsv& hsv) noexcept {
  const double c = hsv.v * hsv.s;
  const double hp = hsv.h / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  const double m = hsv.v - c;
  return {(r + m) * 255.0, (g + m) * 255.0, (b + m) * 255.0};
}

// ---------------------------------------------------------------------------

PointSet::PointSet(std::size_t dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
  if (dim == 0) fail(ErrorKind::Argument, "point dimension must be positive");
  if (coords_.size() % dim != 0) fail(ErrorKind::Argument, "coordinate count is not a multiple of the dimension");
}

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Counts distinct points, stopping once `limit` have been seen.
std::size_t distinct_points(const PointSet& pts, std::size_t limit) {
  std::vector<std::size_t> reps;
  for (std::size_t i = 0; i < pts.size() && reps.size() < limit; ++i) {
    const auto p = pts[i];
    const bool seen = std::any_of(reps.begin(), reps.end(), [&](std::size_t j) {
      const auto q = pts[j];
      return std::equal(p.begin(), p.end(), q.begin());
    });
    if (!seen) reps.push_back(i);
  }
  return reps.size();
}

std::vector<double> seed_plus_plus(const PointSet& pts, std::size_t k, Rng& rng) {
  const std::size_t n = pts.size(), dim = pts.dim();
  std::vector<double> centers;
  centers.reserve(k * dim);
  const auto first = pts[rng.below(n)];
  centers.insert(centers.end(), first.begin(), first.end());

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(pts[i], first);

  while (centers.size() < k * dim) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = n;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double cum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        cum += d2[i];
        pick = i;
        if (cum > u) break;
      }
    }
    if (pick == n) break;  // unreachable while k <= distinct points
    const auto c = pts[pick];
    centers.insert(centers.end(), c.begin(), c.end());
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(pts[i], c));
  }
  return centers;
}

struct LloydRun {
  std::vector<double> centers;
  std::vector<std::uint32_t> assignment;
  std::vector<double> trace;
  int iterations = 0;
};

LloydRun lloyd(const PointSet& pts, std::vector<double> centers, std::size_t k, int max_iterations) {
  const std::size_t n = pts.size(), dim = pts.dim();
  LloydRun run;
  run.centers = std::move(centers);
  run.assignment.assign(n, 0);

  auto center = [&](std::size_t c) { return std::span<const double>(run.centers.data() + c * dim, dim); };

  // Returns the number of points whose cluster changed.
  auto assign = [&](bool first) {
    std::size_t changed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = sq_dist(pts[i], center(c));
        if (d < best_d) {
          best_d = d;
          best = static_cast<std::uint32_t>(c);
        }
      }
      if (first || best != run.assignment[i]) ++changed;
      run.assignment[i] = best;
    }
    return changed;
  };

  // Empty clusters keep their previous center.
  auto update = [&] {
    std::vector<double> sums(k * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = pts[i];
      const std::size_t c = run.assignment[i];
      ++counts[c];
      for (std::size_t j = 0; j < dim; ++j) sums[c * dim + j] += p[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < dim; ++j) run.centers[c * dim + j] = sums[c * dim + j] / counts[c];
    }
  };

  auto inertia = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += sq_dist(pts[i], center(run.assignment[i]));
    return s;
  };

  for (int it = 0; it < max_iterations; ++it) {
    if (assign(it == 0) == 0) break;
    update();
    run.trace.push_back(inertia());
    run.iterations = it + 1;
  }
  return run;
}

}  // namespace

KMeansResult kmeans(const PointSet& points, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
  if (points.size() == 0) fail(ErrorKind::Argument, "kmeans: empty point set");
  if (k == 0) fail(ErrorKind::Argument, "kmeans: k must be positive");
  if (options.max_iterations < 1 || options.restarts < 1)
    fail(ErrorKind::Argument, "kmeans: max_iterations and restarts must be positive");
  for (double c : points.coords())
    if (!std::isfinite(c)) fail(ErrorKind::Argument, "kmeans: non-finite coordinate");

  const std::size_t k_eff = distinct_points(points, k);
  const Rng root(seed);

  LloydRun best;
  double best_inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng = root.split(static_cast<std::uint64_t>(r));
    LloydRun run = lloyd(points, seed_plus_plus(points, k_eff, rng), k_eff, options.max_iterations);
    const double inertia = run.trace.empty() ? 0.0 : run.trace.back();
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best = std::move(run);
    }
  }

  KMeansResult out{PointSet(points.dim(), std::move(best.centers)), std::move(best.assignment), best_inertia,
                   std::move(best.trace), best.iterations, k_eff};
  return out;
}

// ---------------------------------------------------------------------------

VisualDescriptor extract_visual_descriptor(const PixelGrid& grid, std::uint64_t seed,
                                           const ExtractionOptions& options) {
  if (options.subsample_cap == 0) fail(ErrorKind::Argument, "subsample cap must be positive");
  const Rng root(seed);
  const std::size_t n = grid.size();

  std::vector<std::size_t> picks(n);
  std::iota(picks.begin(), picks.end(), std::size_t{0});
  if (n > options.subsample_cap) {
    Rng rng = root.split("subsample");
    for (std::size_t i = 0; i < options.subsample_cap; ++i) {
      const std::size_t j = i + rng.below(n - i);
      std::swap(picks[i], picks[j]);
    }
    picks.resize(options.subsample_cap);
    std::sort(picks.begin(), picks.end());
  }

  std::vector<double> coords;
  coords.reserve(picks.size() * kColorChannels);
  const auto pixels = grid.pixels();
  for (std::size_t idx : picks) {
    const Rgb& p = pixels[idx];
    const Hsv hsv = rgb_to_hsv(p.r, p.g, p.b);
    coords.insert(coords.end(), {p.r / 255.0, p.g / 255.0, p.b / 255.0, hsv.h / 360.0, hsv.s, hsv.v});
  }
  const PointSet pts(kColorChannels, std::move(coords));
  const KMeansResult km = kmeans(pts, kDescriptorClusters, root.split("kmeans").seed(), options.kmeans);

  const std::size_t k = km.effective_k;
  std::vector<std::size_t> counts(k, 0);
  std::vector<std::array<double, kColorChannels>> sums(k, std::array<double, kColorChannels>{});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::size_t c = km.assignment[i];
    ++counts[c];
    for (std::size_t j = 0; j < kColorChannels; ++j) sums[c][j] += pts[i][j];
  }

  std::vector<ColorCluster> found(k);
  for (std::size_t c = 0; c < k; ++c) {
    found[c].density = static_cast<double>(counts[c]) / static_cast<double>(pts.size());
    for (std::size_t j = 0; j < kColorChannels; ++j) {
      const double m = counts[c] ? sums[c][j] / counts[c] : km.centers[c][j];
      found[c].mean[j] = std::clamp(m, 0.0, 1.0);
    }
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const ColorCluster& a, const ColorCluster& b) { return a.density > b.density; });

  VisualDescriptor desc;
  desc.real_clusters = k;
  for (std::size_t c = 0; c < kDescriptorClusters; ++c) {
    if (c < k) {
      desc.clusters[c] = found[c];
    } else {
      desc.clusters[c].density = 0.0;
      desc.clusters[c].mean = found[0].mean;
    }
  }
  return desc;
}

void QuantizationConfig::validate() const {
  if (bins_per_channel < 2) fail(ErrorKind::Argument, "bins_per_channel must be >= 2");
  if (tokens_per_channel < 1) fail(ErrorKind::Argument, "tokens_per_channel must be >= 1");
}

std::uint64_t VisualBag::channel_total(std::size_t channel) const {
  const auto b = static_cast<std::size_t>(bins_per_channel);
  return std::accumulate(counts.begin() + channel * b, counts.begin() + (channel + 1) * b, std::uint64_t{0});
}

std::uint64_t VisualBag::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

VisualBag quantize_to_visual_words(const VisualDescriptor& desc, const QuantizationConfig& cfg) {
  cfg.validate();
  const int bins = cfg.bins_per_channel;
  VisualBag bag{bins, std::vector<std::uint32_t>(cfg.vocabulary_size(), 0)};
  for (const ColorCluster& cl : desc.clusters) {
    const auto tokens = static_cast<std::uint32_t>(std::lround(cfg.tokens_per_channel * cl.density));
    if (tokens == 0) continue;
    for (std::size_t c = 0; c < kColorChannels; ++c) {
      const int bin = std::min(static_cast<int>(std::floor(cl.mean[c] * bins)), bins - 1);
      bag.counts[c * bins + static_cast<std::size_t>(std::max(bin, 0))] += tokens;
    }
  }
  return bag;
}

std::vector<std::string> visual_vocabulary(const QuantizationConfig& cfg) {
  cfg.validate();
  std::vector<std::string> names;
  names.reserve(cfg.vocabulary_size());
  for (const char* channel : kChannelNames)
    for (int b = 0; b < cfg.bins_per_channel; ++b) names.push_back(std::string(channel) + ":" + std::to_string(b));
  return names;
}

}  // namespace viralens

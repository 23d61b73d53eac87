#include "tad/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>

namespace tad {

namespace {

// Portable draws on top of mt19937_64; the std distributions are
// implementation-defined and would break cross-platform determinism.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Integer in [lo, hi].
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(engine_() % span);
  }
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct Placed {
  std::size_t first;
  std::size_t last;
  int class_id;
};

VideoRecord make_video(const SynthConfig& cfg, int index) {
  Rng rng(mix(cfg.seed, static_cast<std::uint64_t>(index)));
  char name[32];
  std::snprintf(name, sizeof name, "video_%05d", index);

  const double stride = cfg.snippet_stride;
  const double duration = rng.uniform(cfg.video_duration_range.first, cfg.video_duration_range.second);
  const auto n = static_cast<std::size_t>(std::max(1.0, std::round(duration / stride)));

  std::vector<Placed> placed;
  const auto wanted = rng.integer(cfg.instances_per_video_range.first, cfg.instances_per_video_range.second);
  const double log_lo = std::log(cfg.instance_duration_log_range.first);
  const double log_hi = std::log(cfg.instance_duration_log_range.second);
  for (std::int64_t k = 0; k < wanted; ++k) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      const double d = std::exp(rng.uniform(log_lo, log_hi));
      const auto len = static_cast<std::size_t>(std::max(1.0, std::round(d / stride)));
      if (len > n) continue;
      const auto first = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(n - len)));
      const std::size_t last = first + len - 1;
      // Keep at least one background snippet between instances.
      const bool clash = std::any_of(placed.begin(), placed.end(), [&](const Placed& p) {
        return first <= p.last + 1 && p.first <= last + 1;
      });
      if (clash) continue;
      placed.push_back({first, last, static_cast<int>(rng.integer(0, cfg.num_classes - 1))});
      break;
    }
  }
  std::sort(placed.begin(), placed.end(), [](const Placed& a, const Placed& b) { return a.first < b.first; });

  std::vector<double> indicator(n, 0.0);
  std::vector<int> owner(n, -1);  // index into `placed` of the closest instance within reach
  for (std::size_t p = 0; p < placed.size(); ++p) {
    for (std::size_t i = placed[p].first; i <= placed[p].last; ++i) indicator[i] = 1.0;
  }
  const auto blur = static_cast<std::size_t>(cfg.boundary_blur);
  std::vector<double> weight(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= blur ? i - blur : 0;
    const std::size_t hi = std::min(n - 1, i + blur);
    double s = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) s += indicator[j];
    weight[i] = s / static_cast<double>(hi - lo + 1);

    std::size_t best_dist = blur + 1;
    for (std::size_t p = 0; p < placed.size(); ++p) {
      const std::size_t dist = i < placed[p].first ? placed[p].first - i
                               : i > placed[p].last ? i - placed[p].last
                                                    : 0;
      if (dist < best_dist) {
        best_dist = dist;
        owner[i] = static_cast<int>(p);
      }
    }
  }

  VideoRecord v;
  v.actionness = {name, stride, std::vector<double>(n)};
  v.scores = {name, stride, std::vector<std::vector<double>>(n)};
  const auto width = static_cast<std::size_t>(cfg.num_classes) + 1;
  const double rest = (1.0 - cfg.class_confidence) / static_cast<double>(width - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = weight[i] + cfg.noise_sigma * rng.normal();
    v.actionness.scores[i] = std::clamp(a, 0.0, 1.0);

    std::vector<double> row(width, 0.0);
    for (std::size_t k = 0; k < width; ++k) {
      const bool bg_top = k + 1 == width;
      const bool cls_top = owner[i] >= 0 && static_cast<int>(k) == placed[static_cast<std::size_t>(owner[i])].class_id;
      const double fg = owner[i] >= 0 ? (cls_top ? cfg.class_confidence : rest) : 0.0;
      const double bg = bg_top ? cfg.class_confidence : rest;
      row[k] = owner[i] >= 0 ? weight[i] * fg + (1.0 - weight[i]) * bg : bg;
    }
    double sum = 0.0;
    for (double& x : row) {
      if (cfg.noise_sigma > 0.0) x = std::clamp(x + cfg.noise_sigma * rng.normal(), 1e-6, 1.0);
      sum += x;
    }
    for (double& x : row) x /= sum;
    v.scores.probs[i] = std::move(row);
  }

  for (const auto& p : placed) {
    v.instances.push_back({v.actionness.span_of(p.first, p.last), p.class_id});
  }
  return v;
}

}  // namespace

void SynthConfig::validate() const {
  const auto fail = [](const char* msg) { throw std::invalid_argument(std::string("synth config: ") + msg); };
  if (num_videos < 0) fail("num_videos must be non-negative");
  if (num_classes < 1) fail("need at least one class");
  if (!(snippet_stride > 0.0)) fail("snippet_stride must be positive");
  if (!(video_duration_range.first > 0.0) || video_duration_range.second < video_duration_range.first) {
    fail("video_duration_range must be positive and ordered");
  }
  if (!(instance_duration_log_range.first > 0.0) ||
      instance_duration_log_range.second < instance_duration_log_range.first) {
    fail("instance_duration_log_range must be positive and ordered");
  }
  if (instance_duration_log_range.first > video_duration_range.first) {
    fail("minimum instance duration exceeds the shortest video");
  }
  if (instances_per_video_range.first < 0 || instances_per_video_range.second < instances_per_video_range.first) {
    fail("instances_per_video_range must be non-negative and ordered");
  }
  if (!(noise_sigma >= 0.0)) fail("noise_sigma must be non-negative");
  if (boundary_blur < 0) fail("boundary_blur must be non-negative");
  if (!(class_confidence > 0.0 && class_confidence <= 1.0)) fail("class_confidence must lie in (0, 1]");
}

Corpus synthesize(const SynthConfig& config) {
  config.validate();
  Corpus corpus;
  corpus.videos.reserve(static_cast<std::size_t>(config.num_videos));
  for (int i = 0; i < config.num_videos; ++i) corpus.videos.push_back(make_video(config, i));
  return corpus;
}

}  // namespace tad

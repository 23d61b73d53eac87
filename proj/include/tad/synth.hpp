#pragma once

#include <cstdint>
#include <utility>

#include "tad/corpus.hpp"

namespace tad {

/// Parameters of the seeded synthetic corpus. Durations are in seconds.
struct SynthConfig {
  std::uint64_t seed = 0;
  int num_videos = 200;
  int num_classes = 5;
  std::pair<double, double> video_duration_range{60.0, 180.0};
  /// Instance durations are sampled log-uniformly inside this range.
  std::pair<double, double> instance_duration_log_range{2.0, 40.0};
  std::pair<int, int> instances_per_video_range{1, 4};
  double noise_sigma = 0.1;
  /// Width, in snippets, of the linear ramp on each side of an instance boundary.
  int boundary_blur = 2;
  double snippet_stride = 0.5;
  /// Probability mass of the dominant entry in a clean class-score vector.
  double class_confidence = 0.8;

  /// Throws std::invalid_argument on unordered ranges, non-positive sizes or
  /// a minimum instance duration longer than the shortest video.
  void validate() const;
};

/// Generates the corpus. Instances are snippet-aligned and separated by at
/// least one background snippet. Actionness is the instance indicator,
/// box-blurred over 2 * boundary_blur + 1 snippets, plus clipped Gaussian
/// noise; class scores blend a softened one-hot of the instance class with a
/// background-dominated vector by the same blurred indicator, then get the
/// same noise and are renormalised. Video i depends only on (seed, i).
Corpus synthesize(const SynthConfig& config);

}  // namespace tad

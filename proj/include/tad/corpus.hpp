#pragma once

#include <string>
#include <vector>

#include "tad/detection.hpp"
#include "tad/intervals.hpp"
#include "tad/tag.hpp"

namespace tad {

struct VideoGroundTruth {
  std::string video_id;
  std::vector<GroundTruthInstance> instances;
};

struct VideoProposals {
  std::string video_id;
  std::vector<ScoredInterval> proposals;
};

struct VideoDetections {
  std::string video_id;
  std::vector<Detection> detections;
};

/// Everything known about one video. All three parts share video id and stride.
struct VideoRecord {
  ActionnessTrack actionness;
  SnippetScoreTrack scores;
  std::vector<GroundTruthInstance> instances;

  const std::string& id() const noexcept { return actionness.video_id; }
};

struct Corpus {
  std::vector<VideoRecord> videos;

  int num_classes() const noexcept {
    return videos.empty() ? 0 : videos.front().scores.num_classes();
  }
  std::vector<VideoGroundTruth> ground_truth() const;
  /// Throws std::invalid_argument when a video's parts disagree or K differs
  /// between videos.
  void validate() const;
};

}  // namespace tad

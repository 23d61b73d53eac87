#include "tad/corpus.hpp"

#include <stdexcept>

namespace tad {

std::vector<VideoGroundTruth> Corpus::ground_truth() const {
  std::vector<VideoGroundTruth> out;
  out.reserve(videos.size());
  for (const auto& v : videos) out.push_back({v.id(), v.instances});
  return out;
}

void Corpus::validate() const {
  const int k = num_classes();
  for (const auto& v : videos) {
    v.actionness.validate();
    v.scores.validate();
    if (v.scores.video_id != v.id() || v.scores.snippet_stride != v.actionness.snippet_stride ||
        v.scores.probs.size() != v.actionness.scores.size()) {
      throw std::invalid_argument("video '" + v.id() + "': actionness and class scores disagree");
    }
    if (v.scores.num_classes() != k) {
      throw std::invalid_argument("video '" + v.id() + "': class count differs from the corpus");
    }
    for (const auto& g : v.instances) {
      if (g.class_id < 0 || g.class_id >= k) {
        throw std::invalid_argument("video '" + v.id() + "': instance class out of range");
      }
      if (g.interval.end() > v.actionness.duration() * (1.0 + 1e-12)) {
        throw std::invalid_argument("video '" + v.id() + "': instance ends after the video");
      }
    }
  }
}

}  // namespace tad

#include "tad/tag.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tad {

namespace {

void check_grid(const std::vector<double>& grid, const char* name) {
  if (grid.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) {
      throw std::invalid_argument(std::string(name) + " grid value outside [0, 1]");
    }
    if (i > 0 && grid[i] < grid[i - 1]) {
      throw std::invalid_argument(std::string(name) + " grid must be sorted");
    }
  }
}

}  // namespace

void ActionnessTrack::validate() const {
  if (!(snippet_stride > 0.0) || !std::isfinite(snippet_stride)) {
    throw std::invalid_argument("actionness track '" + video_id + "': stride must be positive");
  }
  if (scores.empty()) {
    throw std::invalid_argument("actionness track '" + video_id + "' is empty");
  }
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw std::invalid_argument("actionness track '" + video_id + "': score outside [0, 1]");
    }
  }
}

TemporalInterval ActionnessTrack::span_of(std::size_t first, std::size_t last) const {
  return {static_cast<double>(first) * snippet_stride,
          static_cast<double>(last + 1) * snippet_stride};
}

TagConfig TagConfig::defaults() {
  TagConfig cfg;
  for (int i = 1; i <= 9; ++i) cfg.tau_grid.push_back(i / 10.0);
  for (int i = 0; i <= 9; ++i) cfg.gamma_grid.push_back(i / 10.0);
  return cfg;
}

void TagConfig::validate() const {
  check_grid(tau_grid, "tau");
  check_grid(gamma_grid, "gamma");
  if (!(dedup_iou >= 0.0 && dedup_iou <= 1.0)) {
    throw std::invalid_argument("dedup_iou outside [0, 1]");
  }
}

std::vector<Fragment> extract_fragments(const ActionnessTrack& track, double tau) {
  std::vector<Fragment> out;
  const auto& s = track.scores;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] < tau) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < s.size() && s[j + 1] >= tau) ++j;
    out.push_back({i, j});
    i = j + 1;
  }
  return out;
}

SnippetRange grow_from_fragment(std::span<const Fragment> fragments, std::size_t start,
                                double /*tau*/, double gamma, const ActionnessTrack& /*track*/) {
  if (start >= fragments.size()) throw std::out_of_range("start fragment index out of range");

  // Fragments are maximal, so every snippet between two consecutive
  // fragments is below tau and the low count is the sum of the gaps.
  SnippetRange region = fragments[start];
  std::size_t low = 0;
  for (std::size_t j = start + 1; j < fragments.size(); ++j) {
    const std::size_t tentative_low = low + (fragments[j].first - fragments[j - 1].last - 1);
    const std::size_t tentative_len = fragments[j].last - region.first + 1;
    const double fraction =
        static_cast<double>(tentative_low) / static_cast<double>(tentative_len);
    if (fraction > gamma) break;
    low = tentative_low;
    region.last = fragments[j].last;
  }
  return region;
}

std::vector<TagCandidate> tag_candidates(const ActionnessTrack& track, const TagConfig& config) {
  track.validate();
  config.validate();
  std::vector<TagCandidate> out;
  for (double tau : config.tau_grid) {
    const auto fragments = extract_fragments(track, tau);
    for (double gamma : config.gamma_grid) {
      for (std::size_t k = 0; k < fragments.size(); ++k) {
        out.push_back({grow_from_fragment(fragments, k, tau, gamma, track), tau, gamma});
      }
    }
  }
  return out;
}

std::vector<ScoredInterval> tag_propose(const ActionnessTrack& track, const TagConfig& config) {
  const auto candidates = tag_candidates(track, config);

  std::vector<SnippetRange> ranges;
  ranges.reserve(candidates.size());
  for (const auto& c : candidates) ranges.push_back(c.range);
  std::sort(ranges.begin(), ranges.end());
  ranges.erase(std::unique(ranges.begin(), ranges.end()), ranges.end());

  std::vector<double> prefix(track.scores.size() + 1, 0.0);
  for (std::size_t i = 0; i < track.scores.size(); ++i) prefix[i + 1] = prefix[i] + track.scores[i];

  std::vector<ScoredInterval> scored;
  scored.reserve(ranges.size());
  for (const auto& r : ranges) {
    const double mean = (prefix[r.last + 1] - prefix[r.first]) / static_cast<double>(r.length());
    scored.push_back({track.span_of(r.first, r.last), mean, std::nullopt});
  }

  auto kept = nms(scored, config.dedup_iou, /*class_aware=*/false);
  std::sort(kept.begin(), kept.end(), [](const ScoredInterval& a, const ScoredInterval& b) {
    if (a.interval.start() != b.interval.start()) return a.interval.start() < b.interval.start();
    return a.interval.end() < b.interval.end();
  });
  return kept;
}

std::vector<TemporalInterval> sliding_windows(double total_duration, int num_scales,
                                              double base_length, double step_ratio,
                                              double scale_factor) {
  if (!(total_duration > 0.0) || !std::isfinite(total_duration)) {
    throw std::invalid_argument("sliding_windows: total duration must be positive");
  }
  if (num_scales < 0 || !(base_length > 0.0) || !(step_ratio > 0.0) || !(scale_factor > 0.0)) {
    throw std::invalid_argument("sliding_windows: invalid scale parameters");
  }
  constexpr double kEps = 1e-9;
  std::vector<TemporalInterval> out;
  for (int k = 0; k < num_scales; ++k) {
    const double length = base_length * std::pow(scale_factor, k);
    if (length > total_duration + kEps) continue;
    const double step = step_ratio * length;
    double last_start = -1.0;
    for (std::size_t n = 0;; ++n) {
      const double start = static_cast<double>(n) * step;
      if (start + length > total_duration + kEps) break;
      out.emplace_back(start, std::min(start + length, total_duration));
      last_start = start;
    }
    const double flush = std::max(0.0, total_duration - length);
    if (std::abs(flush - last_start) > kEps) out.emplace_back(flush, total_duration);
  }
  return out;
}

}  // namespace tad

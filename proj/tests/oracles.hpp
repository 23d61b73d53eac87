#pragma once

// Reference procedures used only by tests. Each one re-derives a result from
// the definition with a deliberately different (slower, more literal)
// algorithm than the library.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "tad/detection.hpp"
#include "tad/intervals.hpp"
#include "tad/tag.hpp"

namespace oracle {

/// Intersection over union from the definition, independent of tad::iou.
inline double iou(const tad::TemporalInterval& a, const tad::TemporalInterval& b) {
  const double inter = std::max(0.0, std::min(a.end(), b.end()) - std::max(a.start(), b.start()));
  const double uni = std::max(a.end(), b.end()) - std::min(a.start(), b.start()) -
                     std::max(0.0, std::max(a.start(), b.start()) - std::min(a.end(), b.end()));
  return inter <= 0.0 ? 0.0 : inter / uni;
}

/// Exhaustive greedy NMS: every step scans all remaining items for the best
/// one, then deletes everything it suppresses.
inline std::vector<tad::ScoredInterval> nms(std::vector<tad::ScoredInterval> rest, double threshold,
                                            bool class_aware) {
  std::vector<tad::ScoredInterval> kept;
  while (!rest.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < rest.size(); ++i) {
      const auto& a = rest[i];
      const auto& b = rest[best];
      const auto key_a = std::make_tuple(-a.score, a.interval.start(), a.interval.duration());
      const auto key_b = std::make_tuple(-b.score, b.interval.start(), b.interval.duration());
      if (key_a < key_b) best = i;
    }
    const tad::ScoredInterval top = rest[best];
    kept.push_back(top);
    std::vector<tad::ScoredInterval> next;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      if (i == best) continue;
      const bool same = !class_aware || rest[i].class_id == top.class_id;
      if (same && tad::iou(rest[i].interval, top.interval) > threshold) continue;
      next.push_back(rest[i]);
    }
    rest = std::move(next);
  }
  return kept;
}

/// Fragments recovered from the binarised track: a run starts where the
/// indicator switches 0 -> 1 and ends where it switches 1 -> 0.
inline std::vector<tad::SnippetRange> fragments(const std::vector<double>& s, double tau) {
  std::vector<int> ind(s.size() + 2, 0);
  for (std::size_t i = 0; i < s.size(); ++i) ind[i + 1] = s[i] >= tau ? 1 : 0;
  std::vector<tad::SnippetRange> out;
  std::size_t open = 0;
  for (std::size_t i = 1; i < ind.size(); ++i) {
    if (ind[i] == 1 && ind[i - 1] == 0) open = i - 1;
    if (ind[i] == 0 && ind[i - 1] == 1) out.push_back({open, i - 2});
  }
  return out;
}

/// Literal replay of the grouping rule over every (tau, gamma, start) triple,
/// recounting low snippets over the whole tentative region at every step.
inline std::set<std::pair<std::size_t, std::size_t>> tag_regions(const std::vector<double>& s,
                                                                 const std::vector<double>& taus,
                                                                 const std::vector<double>& gammas) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (double tau : taus) {
    const auto frags = fragments(s, tau);
    for (double gamma : gammas) {
      for (std::size_t k = 0; k < frags.size(); ++k) {
        std::size_t end = frags[k].last;
        for (std::size_t j = k + 1; j < frags.size(); ++j) {
          std::size_t low = 0;
          for (std::size_t i = frags[k].first; i <= frags[j].last; ++i) low += s[i] < tau ? 1 : 0;
          const std::size_t len = frags[j].last - frags[k].first + 1;
          if (static_cast<double>(low) / static_cast<double>(len) > gamma) break;
          end = frags[j].last;
        }
        out.emplace(frags[k].first, end);
      }
    }
  }
  return out;
}

/// AP by explicit enumeration: replays the matching for every detection and
/// sums, over true positives, the best precision achieved at that rank or
/// any later one, divided by the number of instances.
inline double average_precision(std::vector<tad::Detection> dets, const std::vector<tad::GroundTruthInstance>& gts,
                                int class_id, double threshold) {
  std::vector<tad::TemporalInterval> pool;
  for (const auto& g : gts) {
    if (g.class_id == class_id) pool.push_back(g.interval);
  }
  if (pool.empty()) return 0.0;
  std::erase_if(dets, [&](const tad::Detection& d) { return d.class_id != class_id; });
  std::stable_sort(dets.begin(), dets.end(), [](const tad::Detection& a, const tad::Detection& b) {
    if (a.s_det != b.s_det) return a.s_det > b.s_det;
    return a.interval.start() < b.interval.start();
  });

  std::vector<bool> used(pool.size(), false);
  std::vector<int> tp(dets.size(), 0);
  for (std::size_t i = 0; i < dets.size(); ++i) {
    int pick = -1;
    double best = 0.0;
    for (std::size_t g = 0; g < pool.size(); ++g) {
      if (used[g]) continue;
      const double v = tad::iou(dets[i].interval, pool[g]);
      if (v >= threshold && (pick < 0 || v > best)) {
        pick = static_cast<int>(g);
        best = v;
      }
    }
    if (pick >= 0) {
      used[static_cast<std::size_t>(pick)] = true;
      tp[i] = 1;
    }
  }
  double ap = 0.0;
  for (std::size_t k = 0; k < dets.size(); ++k) {
    if (!tp[k]) continue;
    double best_prec = 0.0;
    for (std::size_t j = k; j < dets.size(); ++j) {
      int hits = 0;
      for (std::size_t q = 0; q <= j; ++q) hits += tp[q];
      best_prec = std::max(best_prec, static_cast<double>(hits) / static_cast<double>(j + 1));
    }
    ap += best_prec;
  }
  return ap / static_cast<double>(pool.size());
}

/// Recall by a plain double loop.
inline double recall(const std::vector<tad::TemporalInterval>& props, const std::vector<tad::GroundTruthInstance>& gts,
                     double threshold) {
  if (gts.empty()) return 1.0;
  int hit = 0;
  for (const auto& g : gts) {
    bool any = false;
    for (const auto& p : props) any = any || tad::iou(p, g.interval) >= threshold;
    hit += any ? 1 : 0;
  }
  return static_cast<double>(hit) / static_cast<double>(gts.size());
}

/// Random interval with start in [0, horizon) and length in [min_len, max_len].
inline tad::TemporalInterval random_interval(std::mt19937_64& rng, double horizon, double min_len, double max_len) {
  std::uniform_real_distribution<double> s(0.0, horizon);
  std::uniform_real_distribution<double> l(min_len, max_len);
  const double start = s(rng);
  return {start, start + l(rng)};
}

}  // namespace oracle

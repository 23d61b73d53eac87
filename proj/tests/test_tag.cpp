#include <doctest.h>

#include <random>
#include <set>
#include <stdexcept>

#include "oracles.hpp"
#include "tad/tag.hpp"

using tad::ActionnessTrack;
using tad::Fragment;
using tad::SnippetRange;

namespace {

ActionnessTrack track_of(std::vector<double> s, double stride = 1.0) { return {"v", stride, std::move(s)}; }

std::vector<double> random_scores(std::mt19937_64& rng, std::size_t max_len) {
  const std::size_t n = 1 + rng() % max_len;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(n);
  for (auto& v : s) v = u(rng);
  return s;
}

}  // namespace

TEST_CASE("extract_fragments finds maximal runs at or above tau") {
  const auto t = track_of({0.2, 0.6, 0.7, 0.1, 0.5, 0.9});
  const auto f = tad::extract_fragments(t, 0.5);
  REQUIRE(f.size() == 2);
  CHECK(f[0] == SnippetRange{1, 2});
  CHECK(f[1] == SnippetRange{4, 5});
  CHECK(tad::extract_fragments(t, 0.95).empty());
  CHECK(tad::extract_fragments(t, 0.0).size() == 1);
}

TEST_CASE("extract_fragments matches the transition scan") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = random_scores(rng, 40);
    for (double tau : {0.1, 0.5, 0.9}) CHECK(tad::extract_fragments(track_of(s), tau) == oracle::fragments(s, tau));
  }
}

TEST_CASE("growth stops at the first candidate that breaks the tolerance") {
  SUBCASE("a gap with zero tolerance blocks growth") {
    const auto t = track_of({1, 1, 0, 1});
    const auto f = tad::extract_fragments(t, 0.5);
    CHECK(tad::grow_from_fragment(f, 0, 0.5, 0.0, t) == SnippetRange{0, 1});
  }
  SUBCASE("one low snippet in six is within 0.2") {
    const auto t = track_of({1, 1, 0, 1, 1, 1});
    const auto f = tad::extract_fragments(t, 0.5);
    CHECK(tad::grow_from_fragment(f, 0, 0.5, 0.2, t) == SnippetRange{0, 5});
  }
  SUBCASE("a wide gap stays out") {
    const auto t = track_of({1, 0, 0, 0, 1});
    const auto f = tad::extract_fragments(t, 0.5);
    CHECK(tad::grow_from_fragment(f, 0, 0.5, 0.5, t) == SnippetRange{0, 0});
  }
  SUBCASE("growth does not skip a rejected fragment") {
    // Reaching fragment 1 gives 2 low out of 4; fragment 2 alone would give 3/15.
    const auto t = track_of({1, 0, 0, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
    const auto f = tad::extract_fragments(t, 0.5);
    REQUIRE(f.size() == 3);
    CHECK(tad::grow_from_fragment(f, 0, 0.5, 0.4, t) == SnippetRange{0, 0});
  }
}

TEST_CASE("grown regions start and end on fragments and respect gamma") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const auto t = track_of(random_scores(rng, 50));
    for (double tau : {0.3, 0.6}) {
      const auto f = tad::extract_fragments(t, tau);
      for (double gamma : {0.0, 0.25, 0.6}) {
        for (std::size_t k = 0; k < f.size(); ++k) {
          const auto r = tad::grow_from_fragment(f, k, tau, gamma, t);
          CHECK(r.first == f[k].first);
          CHECK(t.scores[r.last] >= tau);
          std::size_t low = 0;
          for (std::size_t i = r.first; i <= r.last; ++i) low += t.scores[i] < tau ? 1 : 0;
          CHECK(static_cast<double>(low) <= gamma * static_cast<double>(r.length()) + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("tag_candidates equals the literal replay of the grouping rule") {
  std::mt19937_64 rng(99);
  const auto cfg = tad::TagConfig::defaults();
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_scores(rng, 64);
    std::set<std::pair<std::size_t, std::size_t>> got;
    for (const auto& c : tad::tag_candidates(track_of(s), cfg)) got.emplace(c.range.first, c.range.last);
    CHECK(got == oracle::tag_regions(s, cfg.tau_grid, cfg.gamma_grid));
  }
}

TEST_CASE("gamma zero reproduces the fragments of each tau") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = track_of(random_scores(rng, 64));
    for (double tau : tad::TagConfig::defaults().tau_grid) {
      tad::TagConfig cfg{{tau}, {0.0}, 0.95};
      std::vector<SnippetRange> got;
      for (const auto& c : tad::tag_candidates(t, cfg)) got.push_back(c.range);
      CHECK(got == tad::extract_fragments(t, tau));
    }
  }
}

TEST_CASE("default grid") {
  const auto cfg = tad::TagConfig::defaults();
  CHECK(cfg.tau_grid.size() == 9);
  CHECK(cfg.gamma_grid.size() == 10);
  CHECK(cfg.gamma_grid.front() == 0.0);
  CHECK(cfg.dedup_iou == 0.95);
  tad::TagConfig bad = cfg;
  bad.tau_grid = {0.5, 1.5};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("tag_propose output is sorted, inside the video and deduplicated") {
  std::mt19937_64 rng(21);
  const auto cfg = tad::TagConfig::defaults();
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = track_of(random_scores(rng, 200), 0.5);
    const auto props = tad::tag_propose(t, cfg);
    for (std::size_t i = 0; i < props.size(); ++i) {
      CHECK(props[i].interval.end() <= t.duration() + 1e-9);
      CHECK(props[i].score >= 0.0);
      CHECK(props[i].score <= 1.0);
      if (i > 0) CHECK(props[i - 1].interval.start() <= props[i].interval.start());
      for (std::size_t j = i + 1; j < props.size(); ++j) CHECK(tad::iou(props[i].interval, props[j].interval) <= 0.95);
    }
  }
}

TEST_CASE("tag_propose on an all-zero track is empty") {
  CHECK(tad::tag_propose(track_of(std::vector<double>(30, 0.0)), tad::TagConfig::defaults()).empty());
}

TEST_CASE("track validation") {
  CHECK_THROWS_AS(track_of({}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(track_of({0.5, 1.2}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(track_of({0.5}, 0.0).validate(), std::invalid_argument);
  const auto t = track_of({0.1, 0.2, 0.3}, 0.5);
  CHECK(t.span_of(1, 2) == tad::TemporalInterval(0.5, 1.5));
}

TEST_CASE("sliding windows") {
  SUBCASE("a single short scale") {
    const auto w = tad::sliding_windows(1.0, 2, 0.3);
    // Length 0.3: starts 0, 0.12, ..., 0.6 then the flush window at 0.7.
    // Length 0.6: starts 0, 0.24 then the flush window at 0.4.
    std::vector<double> short_starts, long_starts;
    for (const auto& iv : w) {
      (iv.duration() < 0.45 ? short_starts : long_starts).push_back(iv.start());
      CHECK(iv.end() <= 1.0 + 1e-9);
    }
    REQUIRE(long_starts.size() == 3);
    CHECK(long_starts[0] == 0.0);
    CHECK(long_starts[1] == doctest::Approx(0.24));
    CHECK(long_starts[2] == doctest::Approx(0.4));
    CHECK(short_starts.back() == doctest::Approx(0.7));
  }
  SUBCASE("scales longer than the video are skipped") {
    for (const auto& iv : tad::sliding_windows(5.0)) CHECK(iv.duration() <= 5.0 + 1e-9);
  }
}

TEST_CASE("fragment coverage shrinks as tau grows") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const auto t = track_of(random_scores(rng, 60));
    std::vector<bool> prev(t.scores.size(), true);
    for (double tau : tad::TagConfig::defaults().tau_grid) {
      std::vector<bool> cover(t.scores.size(), false);
      for (const auto& f : tad::extract_fragments(t, tau)) {
        for (std::size_t i = f.first; i <= f.last; ++i) cover[i] = true;
      }
      for (std::size_t i = 0; i < cover.size(); ++i) CHECK((!cover[i] || prev[i]));
      prev = cover;
    }
  }
}

TEST_CASE("grown regions widen as gamma grows") {
  std::mt19937_64 rng(42);
  const auto gammas = tad::TagConfig::defaults().gamma_grid;
  for (int trial = 0; trial < 200; ++trial) {
    const auto t = track_of(random_scores(rng, 60));
    for (double tau : {0.2, 0.5, 0.8}) {
      const auto f = tad::extract_fragments(t, tau);
      for (std::size_t k = 0; k < f.size(); ++k) {
        std::size_t prev_last = 0;
        for (double gamma : gammas) {
          const auto r = tad::grow_from_fragment(f, k, tau, gamma, t);
          CHECK(r.last >= prev_last);
          prev_last = r.last;
        }
      }
    }
  }
}

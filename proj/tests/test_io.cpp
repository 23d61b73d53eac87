#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "tad/io.hpp"
#include "tad/synth.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tad_test_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("doubles survive a text round trip bit for bit") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 5000; ++i) {
    const double v = i % 3 == 0 ? u(rng) : u(rng) * 1e-12;
    CHECK(bit_equal(std::stod(tad::format_double(v)), v));
  }
  CHECK(tad::format_double(0.5) == "0.5");
  CHECK(tad::format_double(3.0) == "3");
}

TEST_CASE("corpus files round-trip") {
  tad::SynthConfig cfg;
  cfg.num_videos = 6;
  const auto corpus = tad::synthesize(cfg);
  const auto dir = scratch("corpus");
  tad::write_corpus(dir, corpus);
  const auto back = tad::read_corpus(dir);
  REQUIRE(back.videos.size() == corpus.videos.size());
  for (std::size_t v = 0; v < back.videos.size(); ++v) {
    const auto& a = corpus.videos[v];
    const auto& b = back.videos[v];
    CHECK(a.id() == b.id());
    CHECK(a.actionness.scores == b.actionness.scores);
    CHECK(a.scores.probs == b.scores.probs);
    REQUIRE(a.instances.size() == b.instances.size());
    for (std::size_t i = 0; i < a.instances.size(); ++i) {
      CHECK(a.instances[i].interval == b.instances[i].interval);
      CHECK(a.instances[i].class_id == b.instances[i].class_id);
    }
  }
  // Writing what was read reproduces the same bytes.
  const auto again = scratch("corpus_again");
  tad::write_corpus(again, back);
  for (const char* f : {tad::kActionnessFile, tad::kScoresFile, tad::kGroundTruthFile}) {
    CHECK(slurp(dir / f) == slurp(again / f));
  }
}

TEST_CASE("proposals, detections and models round-trip") {
  const auto dir = scratch("artefacts");
  const std::vector<tad::VideoProposals> props{{"a", {{{0.1, 2.5}, 0.3, {}}, {{1, 4}, 0.7, {}}}}, {"b", {}}};
  tad::write_proposals(dir / "p.jsonl", props);
  const auto p2 = tad::read_proposals(dir / "p.jsonl");
  REQUIRE(p2.size() >= 1);
  CHECK(p2[0].video_id == "a");
  REQUIRE(p2[0].proposals.size() == 2);
  CHECK(p2[0].proposals[1].interval == tad::TemporalInterval(1, 4));
  CHECK(p2[0].proposals[1].score == 0.7);

  const std::vector<tad::VideoDetections> dets{{"a", {{{0, 3}, 2, 0.6, -0.25, 0.6 * std::exp(-0.25)}}}};
  tad::write_detections(dir / "d.jsonl", dets);
  const auto d2 = tad::read_detections(dir / "d.jsonl");
  REQUIRE(d2.size() == 1);
  REQUIRE(d2[0].detections.size() == 1);
  CHECK(d2[0].detections[0].class_id == 2);
  CHECK(bit_equal(d2[0].detections[0].s_det, dets[0].detections[0].s_det));
  CHECK(bit_equal(d2[0].detections[0].s_c, -0.25));

  tad::ModelSet models{3, "one_stage", {{0, {0.1, 0.2, 0.3, 0.4, 0.5}, -1.5}, {2, {}, 0.25}}};
  tad::write_models(dir / "m.json", models);
  const auto m2 = tad::read_models(dir / "m.json");
  CHECK(m2.num_classes == 3);
  CHECK(m2.mode == "one_stage");
  REQUIRE(m2.models.size() == 2);
  CHECK(m2.models[0].weights == models.models[0].weights);
  CHECK(m2.models[1].bias == 0.25);
}

TEST_CASE("reports round-trip") {
  tad::EvalReport r;
  r.metric = "mAP";
  r.per_threshold = {{0.5, 0.9}, {0.75, 0.1 + 0.2}};
  r.average = 0.6;
  r.per_class = {{0, {1.0, 0.5}}, {3, {0.8, 0.1}}};
  r.num_ground_truth = 7;
  r.num_predictions = 11;
  r.warnings = {"something"};
  const auto back = tad::report_from_json(tad::Json::parse(tad::dump_json(tad::report_to_json(r))), "mem");
  CHECK(back.metric == r.metric);
  CHECK(back.per_threshold == r.per_threshold);
  CHECK(back.per_class == r.per_class);
  CHECK(back.num_ground_truth == 7);
  CHECK(back.warnings == r.warnings);
}

TEST_CASE("schema violations name the file and line") {
  const auto dir = scratch("bad");
  write_file(dir / "p.jsonl", "{\"video_id\":\"a\",\"start\":0,\"end\":1,\"score\":0.5}\n{\"video_id\":\"a\",\"start\":0}\n");
  try {
    tad::read_proposals(dir / "p.jsonl");
    FAIL("expected a schema error");
  } catch (const tad::SchemaError& e) {
    CHECK(e.line() == 2);
    CHECK(e.file() == (dir / "p.jsonl").string());
  }
  write_file(dir / "q.jsonl", "not json\n");
  CHECK_THROWS_AS(tad::read_proposals(dir / "q.jsonl"), tad::SchemaError);
  write_file(dir / "r.jsonl", "{\"video_id\":\"a\",\"start\":5,\"end\":1,\"score\":0.5}\n");
  CHECK_THROWS_AS(tad::read_proposals(dir / "r.jsonl"), tad::SchemaError);
  CHECK_THROWS_AS(tad::read_proposals(dir / "missing.jsonl"), tad::SchemaError);
  write_file(dir / "m.json", "{\"version\":99,\"K\":1,\"mode\":\"completeness\",\"models\":[]}");
  CHECK_THROWS_AS(tad::read_models(dir / "m.json"), tad::SchemaError);
}

TEST_CASE("a corpus with a missing part is rejected") {
  tad::SynthConfig cfg;
  cfg.num_videos = 2;
  const auto dir = scratch("partial");
  tad::write_corpus(dir, tad::synthesize(cfg));
  const auto gt = slurp(dir / tad::kGroundTruthFile);
  write_file(dir / tad::kGroundTruthFile, gt.substr(0, gt.find('\n') + 1));
  CHECK_THROWS_AS(tad::read_corpus(dir), tad::SchemaError);
}

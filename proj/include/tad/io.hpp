#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tad/corpus.hpp"
#include "tad/evaluation.hpp"

namespace tad {

using Json = nlohmann::ordered_json;

/// Input that does not match its file schema. Carries the file and the
/// 1-based line (0 when the error is not tied to a line).
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string file, std::size_t line, const std::string& what);

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// 17 significant digits, so parsing the text returns the identical double.
std::string format_double(double v);

/// Compact JSON text with doubles printed by format_double.
std::string dump_json(const Json& j);

// Corpus files --------------------------------------------------------------

inline constexpr const char* kActionnessFile = "actionness.jsonl";
inline constexpr const char* kScoresFile = "scores.jsonl";
inline constexpr const char* kGroundTruthFile = "gt.jsonl";

std::vector<ActionnessTrack> read_actionness(const std::filesystem::path& path);
std::vector<SnippetScoreTrack> read_scores(const std::filesystem::path& path);
std::vector<VideoGroundTruth> read_ground_truth(const std::filesystem::path& path);

void write_actionness(const std::filesystem::path& path, const std::vector<ActionnessTrack>& tracks);
void write_scores(const std::filesystem::path& path, const std::vector<SnippetScoreTrack>& tracks);
void write_ground_truth(const std::filesystem::path& path, const std::vector<VideoGroundTruth>& gts);

/// Reads the three corpus files from `dir` and joins them by video id, in the
/// order of the actionness file.
Corpus read_corpus(const std::filesystem::path& dir);
void write_corpus(const std::filesystem::path& dir, const Corpus& corpus);

// Pipeline artefacts ---------------------------------------------------------

/// {video_id, start, end, score}; records of one video are contiguous.
std::vector<VideoProposals> read_proposals(const std::filesystem::path& path);
void write_proposals(const std::filesystem::path& path, const std::vector<VideoProposals>& proposals);

/// {video_id, start, end, score, class_id, p_a, s_c} with score = s_det.
std::vector<VideoDetections> read_detections(const std::filesystem::path& path);
void write_detections(const std::filesystem::path& path, const std::vector<VideoDetections>& detections);

inline constexpr int kModelFormatVersion = 1;

struct ModelSet {
  int num_classes = 0;
  /// "completeness" or "one_stage".
  std::string mode = "completeness";
  std::vector<LinearModel> models;
};

Json model_set_to_json(const ModelSet& set);
ModelSet model_set_from_json(const Json& j, const std::string& source);
ModelSet read_models(const std::filesystem::path& path);
void write_models(const std::filesystem::path& path, const ModelSet& set);

Json report_to_json(const EvalReport& report);
EvalReport report_from_json(const Json& j, const std::string& source);

/// Writes `text` to `path`, replacing any previous content.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace tad

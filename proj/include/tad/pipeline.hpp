#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tad/corpus.hpp"
#include "tad/detection.hpp"
#include "tad/evaluation.hpp"
#include "tad/io.hpp"
#include "tad/synth.hpp"
#include "tad/tag.hpp"

namespace tad {

/// Invalid configuration (bad values, unknown keys, unknown preset).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Preset { kAnet, kThumos };

Preset parse_preset(const std::string& name);
std::string preset_name(Preset preset);

struct DetectionConfig {
  double nms_iou = kAnetNmsIou;
  double context_ratio = 0.25;
  Pooling pooling = Pooling::kMean;
  double h1_alpha = 0.7;
  int h2_bins = 10;
};

struct SlidingWindowConfig {
  int num_scales = 20;
  double base_length = 0.3;
  double step_ratio = 0.4;
  double scale_factor = 2.0;
};

struct PipelineConfig {
  TagConfig tag = TagConfig::defaults();
  SvmConfig svm;
  DetectionConfig detection;
  SlidingWindowConfig sliding;
  SynthConfig synth;
  Preset preset = Preset::kAnet;

  /// Sets the final-NMS threshold and remembers the preset.
  void apply_preset(Preset p);
  /// Throws ConfigError.
  void validate() const;
};

Json config_to_json(const PipelineConfig& config);
/// Missing sections keep their defaults; unknown keys are a ConfigError.
PipelineConfig config_from_json(const Json& j);
PipelineConfig read_config(const std::filesystem::path& path);

/// Deterministic train/eval split: FNV-1a hash of the video id, even = train.
bool is_training_video(const std::string& video_id);

std::vector<VideoProposals> propose_corpus(const Corpus& corpus, const TagConfig& config);
std::vector<VideoProposals> sliding_window_corpus(const Corpus& corpus, const SlidingWindowConfig& config);

struct TrainSummary {
  ModelSet models;
  std::vector<int> skipped_classes;
  std::size_t training_videos = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// Trains class-specific linear filters on the training split. `mode` selects
/// completeness labels + pyramid/context features (kCompleteness) or the
/// single-stage labels + whole-region feature (kOneStage).
TrainSummary train_models(const Corpus& corpus, const std::vector<VideoProposals>& proposals,
                          const PipelineConfig& config, ScoringMode mode);

/// Duration histogram of the training-split ground truth (for H2).
DurationHistogram training_duration_histogram(const Corpus& corpus, int num_bins);

struct CorpusDetections {
  std::vector<VideoDetections> videos;
  DetectDiagnostics diagnostics;
};

/// Detection over the eval split (or every video when `eval_split_only` is false).
CorpusDetections detect_corpus(const Corpus& corpus, const std::vector<VideoProposals>& proposals,
                               const ModelSet& models, const DetectOptions& options,
                               bool eval_split_only = true);

std::vector<VideoGroundTruth> eval_ground_truth(const Corpus& corpus);

DetectOptions detect_options(const PipelineConfig& config, ScoringMode mode);

struct RunRequest {
  std::filesystem::path corpus_dir;
  std::filesystem::path output_dir;
  PipelineConfig config;
};

struct RunResult {
  EvalReport recall;
  EvalReport map_average;
  EvalReport map_preset;
  std::size_t num_proposals = 0;
  std::size_t num_detections = 0;
  std::vector<int> skipped_classes;
  DetectDiagnostics diagnostics;
  std::map<std::string, double> timings_sec;
};

inline constexpr const char* kProposalsFile = "proposals.jsonl";
inline constexpr const char* kModelsFile = "models.json";
inline constexpr const char* kDetectionsFile = "detections.jsonl";
inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kReportTextFile = "report.txt";
inline constexpr const char* kManifestFile = "manifest.json";

/// propose -> train on the training split -> detect on the eval split ->
/// evaluate. Writes proposals, models, detections, report (JSON and text) and
/// a manifest holding the config, seed, input digests and stage timings into
/// output_dir. On failure every file written so far is removed and the error
/// is rethrown.
RunResult run_pipeline(const RunRequest& request);

/// Rebuilds the request recorded in a manifest. `output_dir` replaces the
/// recorded output location.
RunRequest request_from_manifest(const std::filesystem::path& manifest,
                                 const std::filesystem::path& output_dir);

struct AblationRow {
  std::string name;
  EvalReport map_average;
  EvalReport map_preset;
};

/// One-stage vs. cascade + H1 vs. cascade + H2 vs. cascade + completeness,
/// all on the same TAG proposals and eval split.
std::vector<AblationRow> run_ablation(const Corpus& corpus, const std::vector<VideoProposals>& proposals,
                                      const PipelineConfig& config);

std::string format_ablation(const std::vector<AblationRow>& rows);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

}  // namespace tad

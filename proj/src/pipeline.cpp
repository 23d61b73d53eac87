#include "tad/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace tad {

namespace fs = std::filesystem;

namespace {

// ---- config parsing ---------------------------------------------------------

class Section {
 public:
  Section(const Json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config section '" + name_ + "' must be an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    const std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items()) {
      if (!known.contains(k)) throw ConfigError("unknown config key '" + name_ + "." + k + "'");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  template <typename T>
  void read(const char* key, T& out) const {
    if (!j_.contains(key)) return;
    const Json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw std::invalid_argument("expected a number");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("expected a string");
      }
      out = v.get<T>();
    } catch (const std::exception& e) {
      throw ConfigError("config key '" + name_ + "." + key + "': " + e.what());
    }
  }

  void read_range(const char* key, std::pair<double, double>& out) const {
    std::vector<double> v;
    read(key, v);
    if (j_.contains(key)) {
      if (v.size() != 2) throw ConfigError("config key '" + name_ + "." + key + "' needs two values");
      out = {v[0], v[1]};
    }
  }

  void read_range(const char* key, std::pair<int, int>& out) const {
    std::vector<int> v;
    read(key, v);
    if (j_.contains(key)) {
      if (v.size() != 2) throw ConfigError("config key '" + name_ + "." + key + "' needs two values");
      out = {v[0], v[1]};
    }
  }

  Section sub(const char* key) const { return Section(j_.at(key), name_ + "." + key); }

 private:
  const Json& j_;
  std::string name_;
};

std::uint64_t fnv1a(const char* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::unordered_map<std::string, const VideoProposals*> proposals_by_video(
    const std::vector<VideoProposals>& proposals) {
  std::unordered_map<std::string, const VideoProposals*> out;
  for (const auto& vp : proposals) out.emplace(vp.video_id, &vp);
  return out;
}

std::vector<TemporalInterval> intervals_of(const VideoProposals* vp) {
  std::vector<TemporalInterval> out;
  if (vp == nullptr) return out;
  out.reserve(vp->proposals.size());
  for (const auto& p : vp->proposals) out.push_back(p.interval);
  return out;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

Preset parse_preset(const std::string& name) {
  if (name == "anet") return Preset::kAnet;
  if (name == "thumos") return Preset::kThumos;
  throw ConfigError("unknown preset '" + name + "' (expected anet or thumos)");
}

std::string preset_name(Preset preset) { return preset == Preset::kAnet ? "anet" : "thumos"; }

void PipelineConfig::apply_preset(Preset p) {
  preset = p;
  detection.nms_iou = p == Preset::kAnet ? kAnetNmsIou : kThumosNmsIou;
}

void PipelineConfig::validate() const {
  try {
    tag.validate();
    svm.validate();
    synth.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(detection.nms_iou >= 0.0 && detection.nms_iou <= 1.0)) throw ConfigError("detection.nms_iou outside [0, 1]");
  if (!(detection.context_ratio >= 0.0)) throw ConfigError("detection.context_ratio must be non-negative");
  if (detection.h2_bins < 1) throw ConfigError("detection.h2_bins must be positive");
  if (sliding.num_scales < 0 || !(sliding.base_length > 0.0) || !(sliding.step_ratio > 0.0) ||
      !(sliding.scale_factor > 0.0)) {
    throw ConfigError("invalid sliding window parameters");
  }
}

Json config_to_json(const PipelineConfig& c) {
  return {
      {"preset", preset_name(c.preset)},
      {"tag", {{"tau_grid", c.tag.tau_grid}, {"gamma_grid", c.tag.gamma_grid}, {"dedup_iou", c.tag.dedup_iou}}},
      {"svm",
       {{"lambda", c.svm.lambda},
        {"epochs", c.svm.epochs},
        {"mining_rounds", c.svm.mining_rounds},
        {"mining_batch", c.svm.mining_batch},
        {"seed", c.svm.seed}}},
      {"detection",
       {{"nms_iou", c.detection.nms_iou},
        {"context_ratio", c.detection.context_ratio},
        {"pooling", c.detection.pooling == Pooling::kMean ? "mean" : "max"},
        {"h1_alpha", c.detection.h1_alpha},
        {"h2_bins", c.detection.h2_bins}}},
      {"sliding",
       {{"num_scales", c.sliding.num_scales},
        {"base_length", c.sliding.base_length},
        {"step_ratio", c.sliding.step_ratio},
        {"scale_factor", c.sliding.scale_factor}}},
      {"synth",
       {{"seed", c.synth.seed},
        {"num_videos", c.synth.num_videos},
        {"num_classes", c.synth.num_classes},
        {"video_duration_range", {c.synth.video_duration_range.first, c.synth.video_duration_range.second}},
        {"instance_duration_log_range",
         {c.synth.instance_duration_log_range.first, c.synth.instance_duration_log_range.second}},
        {"instances_per_video_range",
         {c.synth.instances_per_video_range.first, c.synth.instances_per_video_range.second}},
        {"noise_sigma", c.synth.noise_sigma},
        {"boundary_blur", c.synth.boundary_blur},
        {"snippet_stride", c.synth.snippet_stride},
        {"class_confidence", c.synth.class_confidence}}},
  };
}

PipelineConfig config_from_json(const Json& j) {
  PipelineConfig c;
  const Section root(j, "config");
  root.allow({"preset", "tag", "svm", "detection", "sliding", "synth"});
  if (root.has("preset")) {
    std::string name;
    root.read("preset", name);
    c.apply_preset(parse_preset(name));
  }
  if (root.has("tag")) {
    const auto s = root.sub("tag");
    s.allow({"tau_grid", "gamma_grid", "dedup_iou"});
    s.read("tau_grid", c.tag.tau_grid);
    s.read("gamma_grid", c.tag.gamma_grid);
    s.read("dedup_iou", c.tag.dedup_iou);
  }
  if (root.has("svm")) {
    const auto s = root.sub("svm");
    s.allow({"lambda", "epochs", "mining_rounds", "mining_batch", "seed"});
    s.read("lambda", c.svm.lambda);
    s.read("epochs", c.svm.epochs);
    s.read("mining_rounds", c.svm.mining_rounds);
    s.read("mining_batch", c.svm.mining_batch);
    s.read("seed", c.svm.seed);
  }
  if (root.has("detection")) {
    const auto s = root.sub("detection");
    s.allow({"nms_iou", "context_ratio", "pooling", "h1_alpha", "h2_bins"});
    s.read("nms_iou", c.detection.nms_iou);
    s.read("context_ratio", c.detection.context_ratio);
    std::string pooling = "mean";
    s.read("pooling", pooling);
    if (pooling != "mean" && pooling != "max") throw ConfigError("detection.pooling must be mean or max");
    c.detection.pooling = pooling == "mean" ? Pooling::kMean : Pooling::kMax;
    s.read("h1_alpha", c.detection.h1_alpha);
    s.read("h2_bins", c.detection.h2_bins);
  }
  if (root.has("sliding")) {
    const auto s = root.sub("sliding");
    s.allow({"num_scales", "base_length", "step_ratio", "scale_factor"});
    s.read("num_scales", c.sliding.num_scales);
    s.read("base_length", c.sliding.base_length);
    s.read("step_ratio", c.sliding.step_ratio);
    s.read("scale_factor", c.sliding.scale_factor);
  }
  if (root.has("synth")) {
    const auto s = root.sub("synth");
    s.allow({"seed", "num_videos", "num_classes", "video_duration_range", "instance_duration_log_range",
             "instances_per_video_range", "noise_sigma", "boundary_blur", "snippet_stride",
             "class_confidence"});
    s.read("seed", c.synth.seed);
    s.read("num_videos", c.synth.num_videos);
    s.read("num_classes", c.synth.num_classes);
    s.read_range("video_duration_range", c.synth.video_duration_range);
    s.read_range("instance_duration_log_range", c.synth.instance_duration_log_range);
    s.read_range("instances_per_video_range", c.synth.instances_per_video_range);
    s.read("noise_sigma", c.synth.noise_sigma);
    s.read("boundary_blur", c.synth.boundary_blur);
    s.read("snippet_stride", c.synth.snippet_stride);
    s.read("class_confidence", c.synth.class_confidence);
  }
  c.validate();
  return c;
}

PipelineConfig read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

bool is_training_video(const std::string& video_id) {
  return fnv1a(video_id.data(), video_id.size()) % 2 == 0;
}

std::vector<VideoProposals> propose_corpus(const Corpus& corpus, const TagConfig& config) {
  std::vector<VideoProposals> out;
  out.reserve(corpus.videos.size());
  for (const auto& v : corpus.videos) out.push_back({v.id(), tag_propose(v.actionness, config)});
  return out;
}

std::vector<VideoProposals> sliding_window_corpus(const Corpus& corpus, const SlidingWindowConfig& config) {
  std::vector<VideoProposals> out;
  out.reserve(corpus.videos.size());
  for (const auto& v : corpus.videos) {
    VideoProposals vp{v.id(), {}};
    for (const auto& w : sliding_windows(v.actionness.duration(), config.num_scales, config.base_length,
                                         config.step_ratio, config.scale_factor)) {
      vp.proposals.push_back({w, 0.0, std::nullopt});
    }
    out.push_back(std::move(vp));
  }
  return out;
}

TrainSummary train_models(const Corpus& corpus, const std::vector<VideoProposals>& proposals,
                          const PipelineConfig& config, ScoringMode mode) {
  if (mode != ScoringMode::kCompleteness && mode != ScoringMode::kOneStage) {
    throw std::invalid_argument("only completeness and one-stage filters are trainable");
  }
  const int k = corpus.num_classes();
  std::vector<LabeledFeatures> features(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) features[static_cast<std::size_t>(c)].class_id = c;

  TrainSummary summary;
  const auto by_video = proposals_by_video(proposals);
  for (const auto& v : corpus.videos) {
    if (!is_training_video(v.id())) continue;
    ++summary.training_videos;
    const auto it = by_video.find(v.id());
    const auto intervals = intervals_of(it == by_video.end() ? nullptr : it->second);
    const auto samples = mode == ScoringMode::kCompleteness ? completeness_samples(intervals, v.instances, k)
                                                            : one_stage_samples(intervals, v.instances, k);
    for (const auto& cs : samples) {
      auto& dst = features[static_cast<std::size_t>(cs.class_id)];
      const auto feature = [&](const TemporalInterval& p) {
        auto f = completeness_features(v.scores, p, cs.class_id, config.detection.context_ratio);
        return mode == ScoringMode::kOneStage ? f.region_only() : f;
      };
      for (const auto& p : cs.positives) dst.positives.push_back(feature(p));
      for (const auto& p : cs.negatives) dst.negatives.push_back(feature(p));
    }
  }
  for (const auto& f : features) {
    summary.positives += f.positives.size();
    summary.negatives += f.negatives.size();
  }
  FilterTraining trained = train_completeness_filters(features, config.svm);
  summary.models.num_classes = k;
  summary.models.mode = mode == ScoringMode::kCompleteness ? "completeness" : "one_stage";
  summary.models.models = std::move(trained.models);
  summary.skipped_classes = std::move(trained.skipped_classes);
  return summary;
}

DurationHistogram training_duration_histogram(const Corpus& corpus, int num_bins) {
  std::vector<double> durations;
  for (const auto& v : corpus.videos) {
    if (!is_training_video(v.id())) continue;
    for (const auto& g : v.instances) durations.push_back(g.interval.duration());
  }
  if (durations.empty()) return DurationHistogram({0.0, 1.0}, {0.0});
  return DurationHistogram::from_durations(durations, num_bins);
}

DetectOptions detect_options(const PipelineConfig& config, ScoringMode mode) {
  DetectOptions o;
  o.nms_iou = config.detection.nms_iou;
  o.context_ratio = config.detection.context_ratio;
  o.pooling = config.detection.pooling;
  o.mode = mode;
  o.h1_alpha = config.detection.h1_alpha;
  return o;
}

CorpusDetections detect_corpus(const Corpus& corpus, const std::vector<VideoProposals>& proposals,
                               const ModelSet& models, const DetectOptions& options, bool eval_split_only) {
  CorpusDetections out;
  const auto by_video = proposals_by_video(proposals);
  for (const auto& v : corpus.videos) {
    if (eval_split_only && is_training_video(v.id())) continue;
    const auto it = by_video.find(v.id());
    const auto intervals = intervals_of(it == by_video.end() ? nullptr : it->second);
    auto r = detect(v.actionness, v.scores, intervals, models.models, options);
    out.diagnostics.proposals += r.diagnostics.proposals;
    out.diagnostics.background_rejected += r.diagnostics.background_rejected;
    out.diagnostics.missing_model += r.diagnostics.missing_model;
    out.diagnostics.zero_score += r.diagnostics.zero_score;
    out.videos.push_back({v.id(), std::move(r.detections)});
  }
  return out;
}

std::vector<VideoGroundTruth> eval_ground_truth(const Corpus& corpus) {
  std::vector<VideoGroundTruth> out;
  for (const auto& v : corpus.videos) {
    if (!is_training_video(v.id())) out.push_back({v.id(), v.instances});
  }
  return out;
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h = fnv1a(buf, static_cast<std::size_t>(in.gcount()), h);
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

RunResult run_pipeline(const RunRequest& request) {
  request.config.validate();
  const PipelineConfig& config = request.config;
  const fs::path& out_dir = request.output_dir;

  std::vector<fs::path> written;
  const auto track = [&](const fs::path& p) {
    written.push_back(p);
    return p;
  };
  try {
    fs::create_directories(out_dir);
    RunResult result;

    auto t0 = Clock::now();
    const Corpus corpus = read_corpus(request.corpus_dir);
    result.timings_sec["load"] = seconds_since(t0);

    t0 = Clock::now();
    const auto proposals = propose_corpus(corpus, config.tag);
    for (const auto& vp : proposals) result.num_proposals += vp.proposals.size();
    write_proposals(track(out_dir / kProposalsFile), proposals);
    result.timings_sec["propose"] = seconds_since(t0);

    t0 = Clock::now();
    const TrainSummary trained = train_models(corpus, proposals, config, ScoringMode::kCompleteness);
    result.skipped_classes = trained.skipped_classes;
    write_models(track(out_dir / kModelsFile), trained.models);
    result.timings_sec["train"] = seconds_since(t0);

    t0 = Clock::now();
    const auto detections =
        detect_corpus(corpus, proposals, trained.models, detect_options(config, ScoringMode::kCompleteness));
    for (const auto& vd : detections.videos) result.num_detections += vd.detections.size();
    result.diagnostics = detections.diagnostics;
    write_detections(track(out_dir / kDetectionsFile), detections.videos);
    result.timings_sec["detect"] = seconds_since(t0);

    t0 = Clock::now();
    const auto gts = eval_ground_truth(corpus);
    std::vector<VideoProposals> eval_proposals;
    for (const auto& vp : proposals) {
      if (!is_training_video(vp.video_id)) eval_proposals.push_back(vp);
    }
    result.recall = average_recall(eval_proposals, gts, EvalThresholds::averaged());
    result.map_average = mean_ap(detections.videos, gts, EvalThresholds::averaged());
    result.map_preset = mean_ap(detections.videos, gts,
                                config.preset == Preset::kAnet ? EvalThresholds::anet_detection()
                                                               : EvalThresholds::thumos_detection());
    Json report = {{"recall", report_to_json(result.recall)},
                   {"map_average", report_to_json(result.map_average)},
                   {"map_preset", report_to_json(result.map_preset)},
                   {"skipped_classes", result.skipped_classes},
                   {"diagnostics",
                    {{"proposals", result.diagnostics.proposals},
                     {"background_rejected", result.diagnostics.background_rejected},
                     {"missing_model", result.diagnostics.missing_model},
                     {"zero_score", result.diagnostics.zero_score}}}};
    write_text(track(out_dir / kReportFile), dump_json(report) + "\n");
    const std::vector<std::pair<std::string, EvalReport>> rows{
        {"TAG proposals", result.recall},
        {"Cascade + Comp.", result.map_average},
        {"Cascade + Comp. (" + preset_name(config.preset) + ")", result.map_preset}};
    write_text(track(out_dir / kReportTextFile), format_table(rows));
    result.timings_sec["evaluate"] = seconds_since(t0);

    Json inputs = Json::object();
    for (const char* name : {kActionnessFile, kScoresFile, kGroundTruthFile}) {
      inputs[name] = file_digest(request.corpus_dir / name);
    }
    Json timings = Json::object();
    for (const auto& [k, v] : result.timings_sec) timings[k] = v;
    const Json manifest = {{"version", 1},
                           {"corpus_dir", fs::absolute(request.corpus_dir).lexically_normal().string()},
                           {"inputs", inputs},
                           {"config", config_to_json(config)},
                           {"seed", config.svm.seed},
                           {"preset", preset_name(config.preset)},
                           {"outputs",
                            {kProposalsFile, kModelsFile, kDetectionsFile, kReportFile, kReportTextFile}},
                           {"counts",
                            {{"videos", corpus.videos.size()},
                             {"proposals", result.num_proposals},
                             {"detections", result.num_detections}}},
                           {"timings_sec", timings}};
    write_text(track(out_dir / kManifestFile), dump_json(manifest) + "\n");
    return result;
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    throw;
  }
}

RunRequest request_from_manifest(const fs::path& manifest, const fs::path& output_dir) {
  std::ifstream in(manifest);
  if (!in) throw ConfigError("cannot open manifest " + manifest.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError("manifest " + manifest.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("corpus_dir") || !j.contains("config") || !j["corpus_dir"].is_string()) {
    throw ConfigError("manifest " + manifest.string() + " lacks corpus_dir or config");
  }
  RunRequest r;
  r.corpus_dir = j["corpus_dir"].get<std::string>();
  r.output_dir = output_dir;
  r.config = config_from_json(j["config"]);
  if (j.contains("inputs") && j["inputs"].is_object()) {
    for (const auto& [name, digest] : j["inputs"].items()) {
      if (file_digest(r.corpus_dir / name) != digest.get<std::string>()) {
        throw ConfigError("corpus file " + name + " changed since the manifest was written");
      }
    }
  }
  return r;
}

std::vector<AblationRow> run_ablation(const Corpus& corpus, const std::vector<VideoProposals>& proposals,
                                      const PipelineConfig& config) {
  const auto gts = eval_ground_truth(corpus);
  const auto preset_grid =
      config.preset == Preset::kAnet ? EvalThresholds::anet_detection() : EvalThresholds::thumos_detection();
  const auto evaluate = [&](const std::string& name, const CorpusDetections& d) {
    return AblationRow{name, mean_ap(d.videos, gts, EvalThresholds::averaged()), mean_ap(d.videos, gts, preset_grid)};
  };

  const TrainSummary one_stage = train_models(corpus, proposals, config, ScoringMode::kOneStage);
  const TrainSummary cascade = train_models(corpus, proposals, config, ScoringMode::kCompleteness);

  std::vector<AblationRow> rows;
  rows.push_back(evaluate(
      "One Stage", detect_corpus(corpus, proposals, one_stage.models, detect_options(config, ScoringMode::kOneStage))));
  rows.push_back(evaluate("Cascade + H1", detect_corpus(corpus, proposals, ModelSet{},
                                                        detect_options(config, ScoringMode::kHeuristicH1))));
  auto h2 = detect_options(config, ScoringMode::kHeuristicH2);
  h2.histogram = training_duration_histogram(corpus, config.detection.h2_bins);
  rows.push_back(evaluate("Cascade + H2", detect_corpus(corpus, proposals, ModelSet{}, h2)));
  rows.push_back(evaluate("Cascade + Comp.", detect_corpus(corpus, proposals, cascade.models,
                                                           detect_options(config, ScoringMode::kCompleteness))));
  return rows;
}

std::string format_ablation(const std::vector<AblationRow>& rows) {
  std::vector<std::pair<std::string, EvalReport>> preset_rows;
  std::vector<std::pair<std::string, EvalReport>> avg_rows;
  for (const auto& r : rows) {
    preset_rows.emplace_back(r.name, r.map_preset);
    avg_rows.emplace_back(r.name, r.map_average);
  }
  return "mAP at detection thresholds\n" + format_table(preset_rows) +
         "\nmAP over [0.5:0.05:0.95]\n" + format_table(avg_rows);
}

}  // namespace tad

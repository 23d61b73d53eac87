#include "cli.hpp"

#include <CLI11.hpp>

#include <optional>

#include "tad/pipeline.hpp"

namespace tad {

namespace fs = std::filesystem;

namespace {

ScoringMode parse_scoring(const std::string& s) {
  if (s == "completeness") return ScoringMode::kCompleteness;
  if (s == "one_stage") return ScoringMode::kOneStage;
  if (s == "h1") return ScoringMode::kHeuristicH1;
  if (s == "h2") return ScoringMode::kHeuristicH2;
  throw ConfigError("unknown scoring mode '" + s + "'");
}

std::vector<VideoProposals> only_eval_split(std::vector<VideoProposals> all) {
  std::erase_if(all, [](const VideoProposals& vp) { return is_training_video(vp.video_id); });
  return all;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Temporal action detection: actionness grouping proposals, cascaded classification, evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string preset;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--seed", seed, "Seed for synthesis and SVM training");
  app.add_option("--preset", preset, "Final NMS preset: anet (0.6) or thumos (0.2)");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic corpus");
  std::string synth_out;
  std::optional<int> videos;
  std::optional<int> classes;
  std::optional<double> noise;
  std::optional<int> blur;
  std::optional<double> stride;
  synth->add_option("--out", synth_out, "Output corpus directory")->required();
  synth->add_option("--videos", videos, "Number of videos");
  synth->add_option("--classes", classes, "Number of activity classes");
  synth->add_option("--noise", noise, "Gaussian noise sigma");
  synth->add_option("--blur", blur, "Boundary ramp width in snippets");
  synth->add_option("--stride", stride, "Snippet stride in seconds");

  // propose
  auto* propose = app.add_subcommand("propose", "Generate temporal proposals");
  std::string corpus_dir;
  std::string out_path;
  std::string method = "tag";
  propose->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  propose->add_option("--out", out_path, "Proposals JSON Lines file")->required();
  propose->add_option("--method", method, "tag or sliding")->check(CLI::IsMember({"tag", "sliding"}));

  // train
  auto* train = app.add_subcommand("train", "Train class-specific filters on the training split");
  std::string proposals_path;
  std::string mode = "completeness";
  train->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  train->add_option("--proposals", proposals_path, "Proposals file")->required();
  train->add_option("--out", out_path, "Model JSON file")->required();
  train->add_option("--mode", mode, "completeness or one_stage")->check(CLI::IsMember({"completeness", "one_stage"}));

  // detect
  auto* detect_cmd = app.add_subcommand("detect", "Run the cascade on proposals");
  std::string models_path;
  std::string scoring;
  bool all_videos = false;
  detect_cmd->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  detect_cmd->add_option("--proposals", proposals_path, "Proposals file")->required();
  detect_cmd->add_option("--models", models_path, "Model JSON file (not needed for h1/h2)");
  detect_cmd->add_option("--out", out_path, "Detections JSON Lines file")->required();
  detect_cmd->add_option("--scoring", scoring, "completeness, one_stage, h1 or h2 (default: from the model file)");
  detect_cmd->add_flag("--all-videos", all_videos, "Detect on every video instead of the eval split");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate proposals (AR) or detections (mAP)");
  std::string detections_path;
  eval->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  auto* eval_det = eval->add_option("--detections", detections_path, "Detections file");
  auto* eval_prop = eval->add_option("--proposals", proposals_path, "Proposals file");
  eval_det->excludes(eval_prop);
  eval->add_option("--out", out_path, "Report JSON file");
  eval->add_flag("--all-videos", all_videos, "Evaluate every video instead of the eval split");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Compare one-stage, H1, H2 and completeness filtering");
  ablate->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  ablate->add_option("--out", out_path, "Text table output file");

  // run
  auto* run = app.add_subcommand("run", "End-to-end pipeline with artefacts and manifest");
  std::string manifest_path;
  std::string run_out;
  auto* run_corpus = run->add_option("--corpus", corpus_dir, "Corpus directory");
  auto* run_manifest = run->add_option("--manifest", manifest_path, "Replay a previous run's manifest");
  run_corpus->excludes(run_manifest);
  run->add_option("--out", run_out, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    PipelineConfig config = config_path.empty() ? PipelineConfig{} : read_config(config_path);
    if (seed) {
      config.synth.seed = *seed;
      config.svm.seed = *seed;
    }
    if (!preset.empty()) config.apply_preset(parse_preset(preset));

    if (synth->parsed()) {
      if (videos) config.synth.num_videos = *videos;
      if (classes) config.synth.num_classes = *classes;
      if (noise) config.synth.noise_sigma = *noise;
      if (blur) config.synth.boundary_blur = *blur;
      if (stride) config.synth.snippet_stride = *stride;
      config.validate();
      const Corpus corpus = synthesize(config.synth);
      write_corpus(synth_out, corpus);
      out << "wrote " << corpus.videos.size() << " videos to " << synth_out << "\n";
      return kExitOk;
    }

    config.validate();
    if (propose->parsed()) {
      const Corpus corpus = read_corpus(corpus_dir);
      const auto proposals =
          method == "tag" ? propose_corpus(corpus, config.tag) : sliding_window_corpus(corpus, config.sliding);
      write_proposals(out_path, proposals);
      std::size_t n = 0;
      for (const auto& vp : proposals) n += vp.proposals.size();
      out << "wrote " << n << " proposals for " << proposals.size() << " videos\n";
      return kExitOk;
    }

    if (train->parsed()) {
      const Corpus corpus = read_corpus(corpus_dir);
      const auto proposals = read_proposals(proposals_path);
      const auto summary = train_models(corpus, proposals, config,
                                        mode == "completeness" ? ScoringMode::kCompleteness : ScoringMode::kOneStage);
      write_models(out_path, summary.models);
      out << "trained " << summary.models.models.size() << " models on " << summary.training_videos
          << " videos (" << summary.positives << " positives, " << summary.negatives << " negatives)\n";
      for (int c : summary.skipped_classes) err << "warning: class " << c << " lacks positives or negatives\n";
      return kExitOk;
    }

    if (detect_cmd->parsed()) {
      const Corpus corpus = read_corpus(corpus_dir);
      const auto proposals = read_proposals(proposals_path);
      ModelSet models;
      if (!models_path.empty()) models = read_models(models_path);
      const ScoringMode m = !scoring.empty() ? parse_scoring(scoring)
                            : models.mode == "one_stage" ? ScoringMode::kOneStage
                                                         : ScoringMode::kCompleteness;
      if ((m == ScoringMode::kCompleteness || m == ScoringMode::kOneStage) && models_path.empty()) {
        throw ConfigError("--models is required for completeness and one_stage scoring");
      }
      auto options = detect_options(config, m);
      if (m == ScoringMode::kHeuristicH2) options.histogram = training_duration_histogram(corpus, config.detection.h2_bins);
      const auto result = detect_corpus(corpus, proposals, models, options, !all_videos);
      write_detections(out_path, result.videos);
      std::size_t n = 0;
      for (const auto& vd : result.videos) n += vd.detections.size();
      out << "wrote " << n << " detections (" << result.diagnostics.background_rejected
          << " proposals rejected as background, " << result.diagnostics.missing_model
          << " dropped for missing models)\n";
      return kExitOk;
    }

    if (eval->parsed()) {
      const Corpus corpus = read_corpus(corpus_dir);
      const auto gts = all_videos ? corpus.ground_truth() : eval_ground_truth(corpus);
      std::vector<std::pair<std::string, EvalReport>> rows;
      Json doc = Json::object();
      if (!detections_path.empty()) {
        const auto dets = read_detections(detections_path);
        const auto grid = config.preset == Preset::kAnet ? EvalThresholds::anet_detection()
                                                         : EvalThresholds::thumos_detection();
        rows.emplace_back("detections", mean_ap(dets, gts, grid));
        rows.emplace_back("detections", mean_ap(dets, gts, EvalThresholds::averaged()));
        doc["map_preset"] = report_to_json(rows[0].second);
        doc["map_average"] = report_to_json(rows[1].second);
      } else if (!proposals_path.empty()) {
        auto proposals = read_proposals(proposals_path);
        if (!all_videos) proposals = only_eval_split(std::move(proposals));
        rows.emplace_back("proposals", average_recall(proposals, gts, EvalThresholds::averaged()));
        doc["recall"] = report_to_json(rows[0].second);
      } else {
        throw ConfigError("eval needs --detections or --proposals");
      }
      for (const auto& [name, r] : rows) {
        for (const auto& w : r.warnings) err << "warning: " << w << "\n";
      }
      out << format_table(rows);
      if (!out_path.empty()) write_text(out_path, dump_json(doc) + "\n");
      return kExitOk;
    }

    if (ablate->parsed()) {
      const Corpus corpus = read_corpus(corpus_dir);
      const auto proposals = propose_corpus(corpus, config.tag);
      const auto table = format_ablation(run_ablation(corpus, proposals, config));
      out << table;
      if (!out_path.empty()) write_text(out_path, table);
      return kExitOk;
    }

    if (run->parsed()) {
      RunRequest request;
      if (!manifest_path.empty()) {
        request = request_from_manifest(manifest_path, run_out);
      } else {
        if (corpus_dir.empty()) throw ConfigError("run needs --corpus or --manifest");
        request = {corpus_dir, run_out, config};
      }
      const RunResult r = run_pipeline(request);
      const std::vector<std::pair<std::string, EvalReport>> rows{
          {"TAG proposals", r.recall}, {"Cascade + Comp.", r.map_average}, {"Cascade + Comp.", r.map_preset}};
      out << format_table(rows);
      for (const auto& w : r.map_average.warnings) err << "warning: " << w << "\n";
      return kExitOk;
    }
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return kExitSchemaError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace tad

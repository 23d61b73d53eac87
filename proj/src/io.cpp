#include "tad/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>

namespace tad {

namespace fs = std::filesystem;

SchemaError::SchemaError(std::string file, std::size_t line, const std::string& what)
    : std::runtime_error(file + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
      file_(std::move(file)),
      line_(line) {}

std::string format_double(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("cannot serialise a non-finite number");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

void dump_into(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += Json(k).dump();
        out += ':';
        dump_into(v, out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        dump_into(v, out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      break;
    default:
      out += j.dump();
  }
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path.string(), 0, "cannot open file");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// Calls `fn` for every non-blank line; any failure is reported with file:line.
void for_each_record(const fs::path& path, const std::function<void(const Json&)>& fn) {
  auto in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json rec = Json::parse(line);
      if (!rec.is_object()) throw std::invalid_argument("record is not a JSON object");
      fn(rec);
    } catch (const SchemaError&) {
      throw;
    } catch (const std::exception& e) {
      throw SchemaError(path.string(), lineno, e.what());
    }
  }
}

const Json& field(const Json& rec, const char* key) {
  const auto it = rec.find(key);
  if (it == rec.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
  return *it;
}

double number(const Json& rec, const char* key) {
  const Json& v = field(rec, key);
  if (!v.is_number()) throw std::invalid_argument(std::string("field '") + key + "' is not a number");
  return v.get<double>();
}

int integer(const Json& rec, const char* key) {
  const Json& v = field(rec, key);
  if (!v.is_number_integer()) throw std::invalid_argument(std::string("field '") + key + "' is not an integer");
  return v.get<int>();
}

std::string text(const Json& rec, const char* key) {
  const Json& v = field(rec, key);
  if (!v.is_string()) throw std::invalid_argument(std::string("field '") + key + "' is not a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const Json& arr, const char* what) {
  if (!arr.is_array()) throw std::invalid_argument(std::string(what) + " is not an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) throw std::invalid_argument(std::string(what) + " holds a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

void write_lines(const fs::path& path, const std::vector<Json>& records) {
  auto out = open_out(path);
  for (const auto& r : records) out << dump_json(r) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

template <typename T, typename Key>
std::vector<T> group_records(std::vector<std::pair<std::string, Key>>&& flat) {
  std::vector<T> out;
  std::unordered_map<std::string, std::size_t> where;
  for (auto& [id, item] : flat) {
    auto [it, inserted] = where.emplace(id, out.size());
    if (inserted) out.push_back(T{id, {}});
    auto& group = out[it->second];
    if constexpr (std::is_same_v<T, VideoProposals>) {
      group.proposals.push_back(std::move(item));
    } else {
      group.detections.push_back(std::move(item));
    }
  }
  return out;
}

}  // namespace

std::string dump_json(const Json& j) {
  std::string out;
  dump_into(j, out);
  return out;
}

std::vector<ActionnessTrack> read_actionness(const fs::path& path) {
  std::vector<ActionnessTrack> out;
  for_each_record(path, [&](const Json& rec) {
    ActionnessTrack t{text(rec, "video_id"), number(rec, "stride_sec"),
                      numbers(field(rec, "actionness"), "actionness")};
    t.validate();
    out.push_back(std::move(t));
  });
  return out;
}

std::vector<SnippetScoreTrack> read_scores(const fs::path& path) {
  std::vector<SnippetScoreTrack> out;
  for_each_record(path, [&](const Json& rec) {
    SnippetScoreTrack t{text(rec, "video_id"), number(rec, "stride_sec"), {}};
    const Json& rows = field(rec, "probs");
    if (!rows.is_array()) throw std::invalid_argument("probs is not an array");
    for (const auto& row : rows) t.probs.push_back(numbers(row, "probs row"));
    t.validate();
    out.push_back(std::move(t));
  });
  return out;
}

std::vector<VideoGroundTruth> read_ground_truth(const fs::path& path) {
  std::vector<VideoGroundTruth> out;
  for_each_record(path, [&](const Json& rec) {
    VideoGroundTruth g{text(rec, "video_id"), {}};
    const Json& inst = field(rec, "instances");
    if (!inst.is_array()) throw std::invalid_argument("instances is not an array");
    for (const auto& i : inst) {
      if (!i.is_object()) throw std::invalid_argument("instance is not an object");
      const int cls = integer(i, "class_id");
      if (cls < 0) throw std::invalid_argument("negative class_id");
      g.instances.push_back({TemporalInterval(number(i, "start"), number(i, "end")), cls});
    }
    out.push_back(std::move(g));
  });
  return out;
}

void write_actionness(const fs::path& path, const std::vector<ActionnessTrack>& tracks) {
  std::vector<Json> recs;
  for (const auto& t : tracks) {
    recs.push_back({{"video_id", t.video_id}, {"stride_sec", t.snippet_stride}, {"actionness", t.scores}});
  }
  write_lines(path, recs);
}

void write_scores(const fs::path& path, const std::vector<SnippetScoreTrack>& tracks) {
  std::vector<Json> recs;
  for (const auto& t : tracks) {
    recs.push_back({{"video_id", t.video_id}, {"stride_sec", t.snippet_stride}, {"probs", t.probs}});
  }
  write_lines(path, recs);
}

void write_ground_truth(const fs::path& path, const std::vector<VideoGroundTruth>& gts) {
  std::vector<Json> recs;
  for (const auto& g : gts) {
    Json inst = Json::array();
    for (const auto& i : g.instances) {
      inst.push_back({{"start", i.interval.start()}, {"end", i.interval.end()}, {"class_id", i.class_id}});
    }
    recs.push_back({{"video_id", g.video_id}, {"instances", std::move(inst)}});
  }
  write_lines(path, recs);
}

Corpus read_corpus(const fs::path& dir) {
  const auto act_path = dir / kActionnessFile;
  const auto sc_path = dir / kScoresFile;
  const auto gt_path = dir / kGroundTruthFile;
  auto actionness = read_actionness(act_path);
  auto scores = read_scores(sc_path);
  auto gts = read_ground_truth(gt_path);

  std::unordered_map<std::string, std::size_t> score_at;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!score_at.emplace(scores[i].video_id, i).second) {
      throw SchemaError(sc_path.string(), i + 1, "duplicate video '" + scores[i].video_id + "'");
    }
  }
  std::unordered_map<std::string, std::size_t> gt_at;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (!gt_at.emplace(gts[i].video_id, i).second) {
      throw SchemaError(gt_path.string(), i + 1, "duplicate video '" + gts[i].video_id + "'");
    }
  }

  Corpus corpus;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < actionness.size(); ++i) {
    auto& a = actionness[i];
    if (!seen.emplace(a.video_id, i).second) {
      throw SchemaError(act_path.string(), i + 1, "duplicate video '" + a.video_id + "'");
    }
    const auto s = score_at.find(a.video_id);
    if (s == score_at.end()) throw SchemaError(sc_path.string(), 0, "no class scores for video '" + a.video_id + "'");
    const auto g = gt_at.find(a.video_id);
    if (g == gt_at.end()) throw SchemaError(gt_path.string(), 0, "no ground truth for video '" + a.video_id + "'");
    corpus.videos.push_back({std::move(a), std::move(scores[s->second]), std::move(gts[g->second].instances)});
  }
  if (scores.size() != actionness.size()) throw SchemaError(sc_path.string(), 0, "videos without actionness");
  if (gts.size() != actionness.size()) throw SchemaError(gt_path.string(), 0, "videos without actionness");
  try {
    corpus.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(dir.string(), 0, e.what());
  }
  return corpus;
}

void write_corpus(const fs::path& dir, const Corpus& corpus) {
  std::vector<ActionnessTrack> act;
  std::vector<SnippetScoreTrack> sc;
  for (const auto& v : corpus.videos) {
    act.push_back(v.actionness);
    sc.push_back(v.scores);
  }
  write_actionness(dir / kActionnessFile, act);
  write_scores(dir / kScoresFile, sc);
  write_ground_truth(dir / kGroundTruthFile, corpus.ground_truth());
}

std::vector<VideoProposals> read_proposals(const fs::path& path) {
  std::vector<std::pair<std::string, ScoredInterval>> flat;
  for_each_record(path, [&](const Json& rec) {
    const double score = number(rec, "score");
    if (!std::isfinite(score)) throw std::invalid_argument("score is not finite");
    flat.emplace_back(text(rec, "video_id"),
                      ScoredInterval{TemporalInterval(number(rec, "start"), number(rec, "end")), score,
                                     std::nullopt});
  });
  return group_records<VideoProposals>(std::move(flat));
}

void write_proposals(const fs::path& path, const std::vector<VideoProposals>& proposals) {
  std::vector<Json> recs;
  for (const auto& vp : proposals) {
    for (const auto& p : vp.proposals) {
      recs.push_back({{"video_id", vp.video_id},
                      {"start", p.interval.start()},
                      {"end", p.interval.end()},
                      {"score", p.score}});
    }
  }
  write_lines(path, recs);
}

std::vector<VideoDetections> read_detections(const fs::path& path) {
  std::vector<std::pair<std::string, Detection>> flat;
  for_each_record(path, [&](const Json& rec) {
    Detection d{TemporalInterval(number(rec, "start"), number(rec, "end")), integer(rec, "class_id"),
                number(rec, "p_a"), number(rec, "s_c"), number(rec, "score")};
    if (d.class_id < 0) throw std::invalid_argument("negative class_id");
    if (!(d.p_a > 0.0 && d.p_a <= 1.0)) throw std::invalid_argument("p_a outside (0, 1]");
    flat.emplace_back(text(rec, "video_id"), d);
  });
  return group_records<VideoDetections>(std::move(flat));
}

void write_detections(const fs::path& path, const std::vector<VideoDetections>& detections) {
  std::vector<Json> recs;
  for (const auto& vd : detections) {
    for (const auto& d : vd.detections) {
      recs.push_back({{"video_id", vd.video_id},
                      {"start", d.interval.start()},
                      {"end", d.interval.end()},
                      {"score", d.s_det},
                      {"class_id", d.class_id},
                      {"p_a", d.p_a},
                      {"s_c", d.s_c}});
    }
  }
  write_lines(path, recs);
}

Json model_set_to_json(const ModelSet& set) {
  Json models = Json::array();
  for (const auto& m : set.models) {
    models.push_back({{"class_id", m.class_id},
                      {"weights", std::vector<double>(m.weights.begin(), m.weights.end())},
                      {"bias", m.bias}});
  }
  return {{"version", kModelFormatVersion}, {"K", set.num_classes}, {"mode", set.mode}, {"models", models}};
}

ModelSet model_set_from_json(const Json& j, const std::string& source) {
  try {
    if (!j.is_object()) throw std::invalid_argument("model document is not an object");
    if (integer(j, "version") != kModelFormatVersion) throw std::invalid_argument("unsupported model version");
    ModelSet set;
    set.num_classes = integer(j, "K");
    if (j.contains("mode")) set.mode = text(j, "mode");
    if (set.mode != "completeness" && set.mode != "one_stage") throw std::invalid_argument("unknown model mode");
    const Json& models = field(j, "models");
    if (!models.is_array()) throw std::invalid_argument("models is not an array");
    for (const auto& m : models) {
      LinearModel lm;
      lm.class_id = integer(m, "class_id");
      if (lm.class_id < 0 || lm.class_id >= set.num_classes) throw std::invalid_argument("class_id outside [0, K)");
      const auto w = numbers(field(m, "weights"), "weights");
      if (w.size() != kFeatureDim) throw std::invalid_argument("weights must have 5 entries");
      std::copy(w.begin(), w.end(), lm.weights.begin());
      lm.bias = number(m, "bias");
      set.models.push_back(lm);
    }
    return set;
  } catch (const std::exception& e) {
    throw SchemaError(source, 0, e.what());
  }
}

ModelSet read_models(const fs::path& path) {
  auto in = open_in(path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const std::exception& e) {
    throw SchemaError(path.string(), 0, e.what());
  }
  return model_set_from_json(j, path.string());
}

void write_models(const fs::path& path, const ModelSet& set) {
  auto out = open_out(path);
  out << dump_json(model_set_to_json(set)) << '\n';
}

Json report_to_json(const EvalReport& report) {
  Json thresholds = Json::array();
  Json values = Json::array();
  for (const auto& [t, v] : report.per_threshold) {
    thresholds.push_back(t);
    values.push_back(v);
  }
  Json per_class = Json::object();
  for (const auto& [c, aps] : report.per_class) per_class[std::to_string(c)] = aps;
  return {{"metric", report.metric},
          {"thresholds", thresholds},
          {"values", values},
          {"average", report.average},
          {"per_class", per_class},
          {"num_ground_truth", report.num_ground_truth},
          {"num_predictions", report.num_predictions},
          {"warnings", report.warnings}};
}

EvalReport report_from_json(const Json& j, const std::string& source) {
  try {
    EvalReport r;
    r.metric = text(j, "metric");
    const auto t = numbers(field(j, "thresholds"), "thresholds");
    const auto v = numbers(field(j, "values"), "values");
    if (t.size() != v.size()) throw std::invalid_argument("thresholds and values differ in length");
    for (std::size_t i = 0; i < t.size(); ++i) r.per_threshold.emplace_back(t[i], v[i]);
    r.average = number(j, "average");
    for (const auto& [k, aps] : field(j, "per_class").items()) {
      r.per_class[std::stoi(k)] = numbers(aps, "per_class");
    }
    r.num_ground_truth = field(j, "num_ground_truth").get<std::size_t>();
    r.num_predictions = field(j, "num_predictions").get<std::size_t>();
    r.warnings = field(j, "warnings").get<std::vector<std::string>>();
    return r;
  } catch (const std::exception& e) {
    throw SchemaError(source, 0, e.what());
  }
}

void write_text(const fs::path& path, const std::string& contents) {
  auto out = open_out(path);
  out << contents;
}

}  // namespace tad

#include "talkit/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"

namespace talkit {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail_parse(const std::string& origin, int line,
                             const std::string& msg) {
  throw ParseError(origin + ":" + std::to_string(line) + ": " + msg);
}

[[noreturn]] void fail_json(const std::string& origin,
                            const std::string& msg) {
  throw ParseError(origin + ": " + msg);
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    if (comma == std::string::npos) {
      out.push_back(trim(line.substr(pos)));
      return out;
    }
    out.push_back(trim(line.substr(pos, comma - pos)));
    pos = comma + 1;
  }
}

bool is_numeric(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(v);
}

double parse_real(const std::string& field, const std::string& origin,
                  int line, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size() ||
      !std::isfinite(v))
    fail_parse(origin, line,
               std::string(what) + " is not a number: '" + field + "'");
  return v;
}

long long parse_integer(const std::string& field, const std::string& origin,
                        int line, const char* what) {
  char* end = nullptr;
  const long long v = std::strtoll(field.c_str(), &end, 10);
  if (field.empty() || end != field.c_str() + field.size())
    fail_parse(origin, line,
               std::string(what) + " is not an integer: '" + field + "'");
  return v;
}

// Lines with their 1-based numbers; blank and '#' comment lines dropped.
struct Line {
  std::string text;
  int number;
};

std::vector<Line> data_lines(const std::string& text) {
  std::vector<Line> out;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string line = text.substr(
        pos, nl == std::string::npos ? std::string::npos : nl - pos);
    ++number;
    const std::string t = trim(line);
    if (!t.empty() && t[0] != '#') out.push_back({t, number});
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return out;
}

std::string where(const std::string& origin, int line) {
  return origin + ":" + std::to_string(line) + ": ";
}

void throw_violations(const std::vector<std::string>& violations) {
  if (violations.empty()) return;
  std::string msg = std::to_string(violations.size()) + " violation" +
                    (violations.size() == 1 ? "" : "s") + ":";
  for (const std::string& v : violations) msg += "\n  " + v;
  throw ValidationError(msg);
}

}  // namespace

std::string format_time(double seconds) {
  long long ms = to_millis(seconds);
  const bool neg = ms < 0;
  if (neg) ms = -ms;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s%lld.%03lld", neg ? "-" : "", ms / 1000,
                ms % 1000);
  return buf;
}

std::string format_confidence(double c) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", c);
  return buf;
}

std::string format_score(double v) { return format_confidence(v); }

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open for writing: " + path);
  out << content;
  out.flush();
  if (!out) throw InputError("write failed: " + path);
}

PredictionSet parse_submission(const std::string& path, bool strict) {
  return parse_submission_text(read_text_file(path), path, strict);
}

PredictionSet parse_submission_text(const std::string& text,
                                    const std::string& origin, bool strict) {
  PredictionSet p;
  std::vector<std::string> violations;
  bool first = true;
  for (const Line& line : data_lines(text)) {
    const auto fields = split_fields(line.text);
    if (first) {
      first = false;
      if (fields.size() >= 2 && !is_numeric(fields[1])) continue;  // header
    }
    if (fields.size() != 5)
      fail_parse(origin, line.number,
                 "expected 5 fields (video_id,label,start,end,confidence), "
                 "got " +
                     std::to_string(fields.size()));
    const std::string& id = fields[0];
    const long long label =
        parse_integer(fields[1], origin, line.number, "class id");
    const double start = parse_real(fields[2], origin, line.number, "start");
    const double end = parse_real(fields[3], origin, line.number, "end");
    double conf = parse_real(fields[4], origin, line.number, "confidence");
    if (!strict) conf = std::min(1.0, std::max(0.0, conf));

    if (id.empty())
      violations.push_back(where(origin, line.number) + "empty video id");
    if (label < 0)
      violations.push_back(where(origin, line.number) +
                           "class id must be >= 0");
    if (start < 0.0)
      violations.push_back(where(origin, line.number) + "negative start");
    if (!(start < end))
      violations.push_back(where(origin, line.number) +
                           "start must be strictly before end");
    if (conf < 0.0 || conf > 1.0)
      violations.push_back(where(origin, line.number) +
                           "confidence outside [0,1]");
    p.videos[id].push_back(
        {static_cast<LabelId>(label), start, end, conf});
  }
  throw_violations(violations);
  canonicalize(p);
  return p;
}

std::string submission_to_string(const PredictionSet& p, bool header) {
  PredictionSet canon = p;
  canonicalize(canon);
  std::string out;
  if (header) out += "video_id,label,start,end,confidence\n";
  for (const auto& [id, segments] : canon.videos)
    for (const Segment& s : segments)
      out += id + "," + std::to_string(s.label) + "," + format_time(s.start) +
             "," + format_time(s.end) + "," + format_confidence(s.confidence) +
             "\n";
  return out;
}

void serialize_submission(const PredictionSet& p, const std::string& path,
                          bool header) {
  write_text_file(path, submission_to_string(p, header));
}

namespace {

GroundTruth parse_ground_truth_flat(const std::string& text,
                                    const std::string& origin) {
  struct Acc {
    double duration = 0.0;
    std::vector<Annotation> annotations;
    std::set<std::tuple<LabelId, long long, long long>> seen;
  };
  std::map<std::string, Acc> acc;
  std::vector<std::string> violations;
  bool first = true;
  for (const Line& line : data_lines(text)) {
    const auto fields = split_fields(line.text);
    if (first) {
      first = false;
      if (fields.size() >= 2 && !is_numeric(fields[1])) continue;  // header
    }
    if (fields.size() == 2) {
      const std::string& id = fields[0];
      const double duration =
          parse_real(fields[1], origin, line.number, "duration");
      if (id.empty())
        violations.push_back(where(origin, line.number) + "empty video id");
      if (acc.count(id)) {
        violations.push_back(where(origin, line.number) +
                             "duplicate duration line for video '" + id +
                             "'");
        continue;
      }
      if (!(duration > 0.0))
        violations.push_back(where(origin, line.number) +
                             "duration must be positive");
      acc[id].duration = duration;
    } else if (fields.size() == 4) {
      const std::string& id = fields[0];
      const long long label =
          parse_integer(fields[1], origin, line.number, "class id");
      const double start =
          parse_real(fields[2], origin, line.number, "start");
      const double end = parse_real(fields[3], origin, line.number, "end");
      auto it = acc.find(id);
      if (it == acc.end()) {
        violations.push_back(where(origin, line.number) + "video '" + id +
                             "' has no duration line yet");
        continue;
      }
      if (label < 0)
        violations.push_back(where(origin, line.number) +
                             "class id must be >= 0");
      if (start < 0.0)
        violations.push_back(where(origin, line.number) + "negative start");
      if (!(start < end))
        violations.push_back(where(origin, line.number) +
                             "start must be strictly before end");
      if (end > it->second.duration)
        violations.push_back(where(origin, line.number) +
                             "annotation ends after the video (duration " +
                             format_time(it->second.duration) + ")");
      if (!it->second.seen
               .insert({static_cast<LabelId>(label), to_millis(start),
                        to_millis(end)})
               .second)
        violations.push_back(where(origin, line.number) +
                             "duplicate annotation");
      it->second.annotations.push_back(
          {static_cast<LabelId>(label), start, end});
    } else {
      fail_parse(origin, line.number,
                 "expected 2 fields (video_id,duration) or 4 fields "
                 "(video_id,label,start,end), got " +
                     std::to_string(fields.size()));
    }
  }
  throw_violations(violations);
  GroundTruth g;
  for (auto& [id, a] : acc)
    g.videos.emplace(id,
                     VideoGroundTruth{a.duration, std::move(a.annotations)});
  canonicalize(g);
  return g;
}

GroundTruth parse_ground_truth_json(const std::string& text,
                                    const std::string& origin,
                                    int* n_classes) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail_json(origin, e.what());
  }
  try {
    if (!j.is_object()) fail_json(origin, "top level must be an object");
    int nc = 0;
    for (const auto& [key, value] : j.items()) {
      if (key == "n_classes") {
        if (!value.is_number_integer() || value.get<long long>() < 1)
          fail_json(origin, "n_classes must be a positive integer");
        nc = value.get<int>();
      } else if (key != "videos") {
        fail_json(origin, "unknown key '" + key + "'");
      }
    }
    if (!j.contains("videos") || !j["videos"].is_object())
      fail_json(origin, "'videos' object is required");

    GroundTruth g;
    for (const auto& [id, jv] : j["videos"].items()) {
      if (!jv.is_object())
        fail_json(origin, "video '" + id + "' must be an object");
      VideoGroundTruth video;
      for (const auto& [key, value] : jv.items()) {
        if (key == "duration") {
          if (!value.is_number())
            fail_json(origin, "video '" + id + "': duration must be a number");
          video.duration = value.get<double>();
        } else if (key == "annotations") {
          if (!value.is_array())
            fail_json(origin,
                      "video '" + id + "': annotations must be an array");
          for (const auto& ja : value) {
            if (!ja.is_object() || !ja.contains("label") ||
                !ja.contains("start") || !ja.contains("end"))
              fail_json(origin, "video '" + id +
                                    "': each annotation needs label, start "
                                    "and end");
            for (const auto& [akey, avalue] : ja.items()) {
              (void)avalue;
              if (akey != "label" && akey != "start" && akey != "end")
                fail_json(origin, "video '" + id + "': unknown annotation "
                                  "key '" + akey + "'");
            }
            if (!ja["label"].is_number_integer())
              fail_json(origin,
                        "video '" + id + "': label must be an integer");
            if (!ja["start"].is_number() || !ja["end"].is_number())
              fail_json(origin,
                        "video '" + id + "': start/end must be numbers");
            video.annotations.push_back({ja["label"].get<LabelId>(),
                                         ja["start"].get<double>(),
                                         ja["end"].get<double>()});
          }
        } else {
          fail_json(origin, "video '" + id + "': unknown key '" + key + "'");
        }
      }
      if (!jv.contains("duration"))
        fail_json(origin, "video '" + id + "': duration is required");
      g.videos.emplace(id, std::move(video));
    }

    auto violations = validate_ground_truth(g, nc);
    if (!violations.empty())
      throw ValidationError(origin + ": invalid ground truth:\n" +
                            violations_to_string(violations));
    canonicalize(g);
    if (n_classes && nc > 0) *n_classes = nc;
    return g;
  } catch (const json::exception& e) {
    fail_json(origin, e.what());
  }
}

}  // namespace

GroundTruth parse_ground_truth(const std::string& path, int* n_classes) {
  return parse_ground_truth_text(read_text_file(path), path, n_classes);
}

GroundTruth parse_ground_truth_text(const std::string& text,
                                    const std::string& origin,
                                    int* n_classes) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{')
    return parse_ground_truth_json(text, origin, n_classes);
  return parse_ground_truth_flat(text, origin);
}

std::string ground_truth_to_string(const GroundTruth& g) {
  GroundTruth canon = g;
  canonicalize(canon);
  std::string out;
  for (const auto& [id, video] : canon.videos) {
    out += id + "," + format_time(video.duration) + "\n";
    for (const Annotation& a : video.annotations)
      out += id + "," + std::to_string(a.label) + "," + format_time(a.start) +
             "," + format_time(a.end) + "\n";
  }
  return out;
}

void serialize_ground_truth(const GroundTruth& g, const std::string& path) {
  write_text_file(path, ground_truth_to_string(g));
}

std::string ground_truth_to_json(const GroundTruth& g, int n_classes) {
  GroundTruth canon = g;
  canonicalize(canon);
  ordered_json j;
  if (n_classes > 0) j["n_classes"] = n_classes;
  ordered_json videos = ordered_json::object();
  for (const auto& [id, video] : canon.videos) {
    ordered_json jv;
    jv["duration"] = video.duration;
    ordered_json anns = ordered_json::array();
    for (const Annotation& a : video.annotations)
      anns.push_back(ordered_json{
          {"label", a.label}, {"start", a.start}, {"end", a.end}});
    jv["annotations"] = std::move(anns);
    videos[id] = std::move(jv);
  }
  j["videos"] = std::move(videos);
  return j.dump(2) + "\n";
}

void serialize_ground_truth_json(const GroundTruth& g,
                                 const std::string& path, int n_classes) {
  write_text_file(path, ground_truth_to_json(g, n_classes));
}

std::vector<IntervalStream> parse_interval_streams(const std::string& path) {
  return parse_interval_streams_text(read_text_file(path), path);
}

std::vector<IntervalStream> parse_interval_streams_text(
    const std::string& text, const std::string& origin) {
  std::vector<IntervalStream> out;
  std::vector<std::string> violations;
  long expected = 0;
  int header_line = 0;

  auto close_block = [&]() {
    if (out.empty()) return;
    const IntervalStream& s = out.back();
    if (static_cast<long>(s.entries.size()) != expected)
      fail_parse(origin, header_line,
                 "stream for video '" + s.video_id + "' must have " +
                     std::to_string(expected) +
                     " records (floor(duration/interval)), got " +
                     std::to_string(s.entries.size()));
  };

  for (const Line& line : data_lines(text)) {
    const auto fields = split_fields(line.text);
    if (fields.size() == 4) {
      close_block();
      IntervalStream s;
      s.video_id = fields[0];
      s.interval = parse_real(fields[1], origin, line.number, "interval");
      s.duration = parse_real(fields[2], origin, line.number, "duration");
      const long long nc =
          parse_integer(fields[3], origin, line.number, "n_classes");
      if (s.video_id.empty())
        violations.push_back(where(origin, line.number) + "empty video id");
      if (nc < 1)
        violations.push_back(where(origin, line.number) +
                             "n_classes must be >= 1");
      s.n_classes = static_cast<int>(nc);
      try {
        expected = partition_count(s.duration, s.interval);
      } catch (const DomainError& e) {
        fail_parse(origin, line.number, e.what());
      }
      header_line = line.number;
      out.push_back(std::move(s));
    } else if (fields.size() == 2) {
      if (out.empty())
        fail_parse(origin, line.number,
                   "entry line before any stream header");
      IntervalStream& s = out.back();
      const long long label =
          parse_integer(fields[0], origin, line.number, "label");
      const double conf =
          parse_real(fields[1], origin, line.number, "confidence");
      if (label < 0 ||
          (s.n_classes >= 1 && label > background_label(s.n_classes)))
        violations.push_back(
            where(origin, line.number) + "label outside [0, " +
            std::to_string(background_label(s.n_classes)) +
            "] (background is " +
            std::to_string(background_label(s.n_classes)) + ")");
      if (conf < 0.0 || conf > 1.0)
        violations.push_back(where(origin, line.number) +
                             "confidence outside [0,1]");
      s.entries.push_back({static_cast<LabelId>(label), conf});
    } else {
      fail_parse(origin, line.number,
                 "expected 4-field stream header (video_id,interval,"
                 "duration,n_classes) or 2-field entry (label,confidence), "
                 "got " +
                     std::to_string(fields.size()) + " fields");
    }
  }
  close_block();
  throw_violations(violations);
  return out;
}

std::string interval_streams_to_string(std::span<const IntervalStream> s) {
  std::string out;
  for (const IntervalStream& stream : s) {
    out += stream.video_id + "," + format_time(stream.interval) + "," +
           format_time(stream.duration) + "," +
           std::to_string(stream.n_classes) + "\n";
    for (const IntervalStream::Entry& e : stream.entries)
      out += std::to_string(e.label) + "," + format_confidence(e.confidence) +
             "\n";
  }
  return out;
}

void serialize_interval_streams(std::span<const IntervalStream> s,
                                const std::string& path) {
  write_text_file(path, interval_streams_to_string(s));
}

EnsembleConfigFile parse_ensemble_config(const std::string& path) {
  return parse_ensemble_config_text(
      read_text_file(path),
      std::filesystem::path(path).parent_path().string(), path);
}

EnsembleConfigFile parse_ensemble_config_text(const std::string& text,
                                              const std::string& base_dir,
                                              const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail_json(origin, e.what());
  }
  if (!j.is_object()) fail_json(origin, "top level must be an object");

  EnsembleConfigFile cfg;
  cfg.threshold_defaulted = true;
  std::vector<std::string> violations;
  for (const auto& [key, value] : j.items()) {
    if (key == "threshold") {
      if (!value.is_number())
        fail_json(origin, "threshold must be a number");
      cfg.threshold = value.get<double>();
      cfg.threshold_defaulted = false;
      if (!(cfg.threshold > 0.0) || cfg.threshold > 1.0)
        violations.push_back(origin + ": threshold must be in (0,1]");
    } else if (key == "models") {
      if (!value.is_array())
        fail_json(origin, "'models' must be an array");
      for (const auto& jm : value) {
        if (!jm.is_object() || !jm.contains("path") || !jm.contains("weight"))
          fail_json(origin, "each model entry needs 'path' and 'weight'");
        for (const auto& [mkey, mvalue] : jm.items()) {
          (void)mvalue;
          if (mkey != "path" && mkey != "weight")
            fail_json(origin, "unknown model key '" + mkey + "'");
        }
        if (!jm["path"].is_string() || jm["path"].get<std::string>().empty())
          fail_json(origin, "model path must be a non-empty string");
        if (!jm["weight"].is_number())
          fail_json(origin, "model weight must be a number");
        EnsembleModelRef ref;
        ref.weight = jm["weight"].get<double>();
        std::filesystem::path mp(jm["path"].get<std::string>());
        if (mp.is_relative() && !base_dir.empty())
          mp = std::filesystem::path(base_dir) / mp;
        ref.path = mp.string();
        if (!(ref.weight > 0.0) || !std::isfinite(ref.weight))
          violations.push_back(origin + ": model '" + ref.path +
                               "': weight must be positive");
        cfg.models.push_back(std::move(ref));
      }
    } else {
      fail_json(origin, "unknown key '" + key + "'");
    }
  }
  if (cfg.models.empty())
    violations.push_back(origin + ": at least one model entry is required");
  throw_violations(violations);
  return cfg;
}

std::map<int, std::string> parse_class_names(const std::string& path) {
  const std::string text = read_text_file(path);
  std::map<int, std::string> names;
  bool first = true;
  for (const Line& line : data_lines(text)) {
    const auto comma = line.text.find(',');
    if (comma == std::string::npos)
      fail_parse(path, line.number, "expected 'id,name'");
    const std::string id_field = trim(line.text.substr(0, comma));
    const std::string name = trim(line.text.substr(comma + 1));
    if (first) {
      first = false;
      if (!is_numeric(id_field)) continue;  // header
    }
    const long long id =
        parse_integer(id_field, path, line.number, "class id");
    if (id < 0) fail_parse(path, line.number, "class id must be >= 0");
    if (!names.emplace(static_cast<int>(id), name).second)
      fail_parse(path, line.number,
                 "duplicate class id " + std::to_string(id));
  }
  return names;
}

std::string eval_report_to_json(const EvalReport& r) {
  ordered_json j;
  j["thresholds"] = r.thresholds;
  j["n_classes"] = r.n_classes;
  j["interpolation"] = r.interpolation;
  j["classes_evaluated"] = r.classes_evaluated;
  j["classes_excluded"] = r.classes_excluded;
  ordered_json ap = ordered_json::object();
  for (const auto& [c, row] : r.ap) ap[std::to_string(c)] = row;
  j["ap"] = std::move(ap);
  j["map_per_threshold"] = r.map_per_threshold;
  j["final_score"] = r.final_score;
  if (!r.note.empty()) j["note"] = r.note;
  return j.dump(2) + "\n";
}

void write_eval_report(const EvalReport& r, const std::string& path) {
  write_text_file(path, eval_report_to_json(r));
}

std::string format_eval_table(const EvalReport& r,
                              const std::map<int, std::string>& names) {
  std::vector<std::pair<std::string, const std::vector<double>*>> rows;
  for (const auto& [c, row] : r.ap) {
    std::string text = std::to_string(c);
    if (auto it = names.find(c); it != names.end() && !it->second.empty())
      text += " " + it->second;
    rows.emplace_back(std::move(text), &row);
  }

  std::size_t width = std::string("final score").size();
  for (const auto& [text, row] : rows) width = std::max(width, text.size());

  std::ostringstream out;
  auto pad = [&](const std::string& s) {
    out << s << std::string(width - std::min(width, s.size()) + 2, ' ');
  };
  pad("class");
  for (double t : r.thresholds) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "AP@%.2f", t);
    out << std::left << std::setw(10) << buf;
  }
  out << '\n';
  for (const auto& [text, row] : rows) {
    pad(text);
    for (double v : *row) out << std::left << std::setw(10) << format_score(v);
    out << '\n';
  }
  pad("mean");
  for (double v : r.map_per_threshold)
    out << std::left << std::setw(10) << format_score(v);
  out << '\n';
  pad("final score");
  out << format_score(r.final_score) << '\n';
  if (!r.classes_excluded.empty()) {
    out << "excluded (no ground truth):";
    for (int c : r.classes_excluded) out << ' ' << c;
    out << '\n';
  }
  if (!r.note.empty()) out << "note: " << r.note << '\n';
  return out.str();
}

namespace {

double need_number(const json& v, const std::string& origin,
                   const std::string& key) {
  if (!v.is_number()) fail_json(origin, "'" + key + "' must be a number");
  return v.get<double>();
}

long long need_integer(const json& v, const std::string& origin,
                       const std::string& key) {
  if (!v.is_number_integer())
    fail_json(origin, "'" + key + "' must be an integer");
  return v.get<long long>();
}

std::pair<double, double> need_pair(const json& v, const std::string& origin,
                                    const std::string& key) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
      !v[1].is_number())
    fail_json(origin, "'" + key + "' must be a [min, max] number pair");
  return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<double> need_number_array(const json& v,
                                      const std::string& origin,
                                      const std::string& key) {
  if (!v.is_array()) fail_json(origin, "'" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number())
      fail_json(origin, "'" + key + "' must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

NoiseModel read_noise(const json& j, const std::string& origin) {
  NoiseModel noise;
  if (!j.is_object()) fail_json(origin, "'noise' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "flip_prob") {
      noise.flip_prob = need_number(value, origin, "noise.flip_prob");
    } else if (key == "conf_correct") {
      std::tie(noise.conf_correct_min, noise.conf_correct_max) =
          need_pair(value, origin, "noise.conf_correct");
    } else if (key == "conf_incorrect") {
      std::tie(noise.conf_incorrect_min, noise.conf_incorrect_max) =
          need_pair(value, origin, "noise.conf_incorrect");
    } else {
      fail_json(origin, "unknown noise key '" + key + "'");
    }
  }
  return noise;
}

SimConfig read_sim_config(const json& j, const std::string& origin) {
  if (!j.is_object()) fail_json(origin, "config must be an object");
  SimConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") {
      if (!value.is_number_integer() ||
          (!value.is_number_unsigned() && value.get<long long>() < 0))
        fail_json(origin, "'seed' must be a non-negative integer");
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "n_videos") {
      cfg.n_videos = static_cast<int>(need_integer(value, origin, key));
    } else if (key == "n_classes") {
      cfg.n_classes = static_cast<int>(need_integer(value, origin, key));
    } else if (key == "duration") {
      std::tie(cfg.duration_min, cfg.duration_max) =
          need_pair(value, origin, key);
    } else if (key == "actions_per_minute") {
      cfg.actions_per_minute = need_number(value, origin, key);
    } else if (key == "action_duration") {
      std::tie(cfg.action_min, cfg.action_max) =
          need_pair(value, origin, key);
    } else if (key == "allow_overlap") {
      if (!value.is_boolean())
        fail_json(origin, "'allow_overlap' must be a boolean");
      cfg.allow_overlap = value.get<bool>();
    } else if (key == "interval") {
      cfg.interval = need_number(value, origin, key);
    } else if (key == "n_models") {
      cfg.n_models = static_cast<int>(need_integer(value, origin, key));
    } else if (key == "label_rule") {
      if (!value.is_string())
        fail_json(origin, "'label_rule' must be a string");
      const std::string rule = value.get<std::string>();
      if (rule == "midpoint")
        cfg.label_rule = IntervalLabelRule::kMidpoint;
      else if (rule == "majority")
        cfg.label_rule = IntervalLabelRule::kMajority;
      else
        fail_json(origin,
                  "'label_rule' must be 'midpoint' or 'majority', got '" +
                      rule + "'");
    } else if (key == "noise") {
      cfg.noise = read_noise(value, origin);
    } else {
      fail_json(origin, "unknown key '" + key + "'");
    }
  }
  return cfg;
}

}  // namespace

SimConfig parse_sim_config(const std::string& path) {
  return parse_sim_config_text(read_text_file(path), path);
}

SimConfig parse_sim_config_text(const std::string& text,
                                const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail_json(origin, e.what());
  }
  return read_sim_config(j, origin);
}

std::string sim_config_to_json(const SimConfig& cfg) {
  ordered_json j;
  j["seed"] = cfg.seed;
  j["n_videos"] = cfg.n_videos;
  j["n_classes"] = cfg.n_classes;
  j["duration"] = {cfg.duration_min, cfg.duration_max};
  j["actions_per_minute"] = cfg.actions_per_minute;
  j["action_duration"] = {cfg.action_min, cfg.action_max};
  j["allow_overlap"] = cfg.allow_overlap;
  j["interval"] = cfg.interval;
  j["n_models"] = cfg.n_models;
  j["label_rule"] = label_rule_name(cfg.label_rule);
  j["noise"] = ordered_json{
      {"flip_prob", cfg.noise.flip_prob},
      {"conf_correct", {cfg.noise.conf_correct_min, cfg.noise.conf_correct_max}},
      {"conf_incorrect",
       {cfg.noise.conf_incorrect_min, cfg.noise.conf_incorrect_max}}};
  return j.dump(2) + "\n";
}

SweepConfig parse_sweep_config(const std::string& path) {
  return parse_sweep_config_text(read_text_file(path), path);
}

SweepConfig parse_sweep_config_text(const std::string& text,
                                    const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail_json(origin, e.what());
  }
  if (!j.is_object()) fail_json(origin, "top level must be an object");
  SweepConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "sim") {
      cfg.base = read_sim_config(value, origin);
    } else if (key == "intervals") {
      cfg.intervals = need_number_array(value, origin, key);
    } else if (key == "noise_levels") {
      cfg.noise_levels = need_number_array(value, origin, key);
    } else if (key == "ensemble_sizes") {
      if (!value.is_array())
        fail_json(origin, "'ensemble_sizes' must be an array");
      cfg.ensemble_sizes.clear();
      for (const auto& e : value)
        cfg.ensemble_sizes.push_back(
            static_cast<int>(need_integer(e, origin, key)));
    } else if (key == "repeats") {
      cfg.repeats = static_cast<int>(need_integer(value, origin, key));
    } else if (key == "merge_threshold") {
      cfg.merge_threshold = need_number(value, origin, key);
    } else if (key == "eval_thresholds") {
      cfg.eval_thresholds = need_number_array(value, origin, key);
    } else {
      fail_json(origin, "unknown key '" + key + "'");
    }
  }
  return cfg;
}

std::string sweep_to_csv(const SweepTable& t) {
  std::string out = "interval,noise,ensemble_size,repeat,final_score,best_single\n";
  for (const SweepRow& r : t.rows)
    out += format_time(r.interval) + "," + format_confidence(r.noise) + "," +
           std::to_string(r.ensemble_size) + "," + std::to_string(r.repeat) +
           "," + format_score(r.final_score) + "," +
           format_score(r.best_single) + "\n";
  return out;
}

void write_sweep_csv(const SweepTable& t, const std::string& path) {
  write_text_file(path, sweep_to_csv(t));
}

std::string format_sweep_table(const SweepTable& t) {
  std::ostringstream out;
  out << std::left << std::setw(10) << "interval" << std::setw(10) << "noise"
      << std::setw(10) << "ensemble" << std::setw(8) << "repeat"
      << std::setw(13) << "final_score" << "best_single" << '\n';
  for (const SweepRow& r : t.rows)
    out << std::left << std::setw(10) << format_time(r.interval)
        << std::setw(10) << format_confidence(r.noise) << std::setw(10)
        << r.ensemble_size << std::setw(8) << r.repeat << std::setw(13)
        << format_score(r.final_score) << format_score(r.best_single) << '\n';
  return out.str();
}

}  // namespace talkit

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "talkit/evaluation.hpp"
#include "talkit/localizer.hpp"
#include "talkit/segment.hpp"
#include "talkit/simulator.hpp"

// All formats are documented with bit-exact examples in docs/FORMATS.md.
// Parsers throw ParseError (malformed content, with line numbers where the
// format has lines), ValidationError (well-formed but invariant-breaking
// content, all violations listed) or InputError (unreadable path).
// Serializers produce canonical, byte-deterministic output.

namespace talkit {

std::string format_time(double seconds);    // millisecond grid, 3 decimals
std::string format_confidence(double c);    // 6 decimals
std::string format_score(double v);         // 6 decimals

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Submission: one "video_id,label,start,end,confidence" line per segment.
// An optional header line is auto-detected. Videos without segments have
// no representation, so they vanish on a round trip. strict = false clamps
// out-of-range confidences into [0,1] instead of rejecting the file; every
// other violation still rejects.
PredictionSet parse_submission(const std::string& path, bool strict = true);
PredictionSet parse_submission_text(const std::string& text,
                                    const std::string& origin,
                                    bool strict = true);
std::string submission_to_string(const PredictionSet& p, bool header = true);
void serialize_submission(const PredictionSet& p, const std::string& path,
                          bool header = true);

// Flat ground truth: "video_id,duration" declares a video (before its
// annotations), "video_id,label,start,end" adds one annotation. A JSON
// alternative carries the same data plus an optional class count; the
// parser auto-detects the variant. n_classes (if non-null) receives the
// JSON file's "n_classes" or stays untouched.
GroundTruth parse_ground_truth(const std::string& path,
                               int* n_classes = nullptr);
GroundTruth parse_ground_truth_text(const std::string& text,
                                    const std::string& origin,
                                    int* n_classes = nullptr);
std::string ground_truth_to_string(const GroundTruth& g);
void serialize_ground_truth(const GroundTruth& g, const std::string& path);
std::string ground_truth_to_json(const GroundTruth& g, int n_classes = 0);
void serialize_ground_truth_json(const GroundTruth& g,
                                 const std::string& path, int n_classes = 0);

// Interval streams: a "video_id,t,L,n_classes" header line opens a block,
// followed by exactly floor(L/t) "label,confidence" lines. A file may hold
// any number of blocks.
std::vector<IntervalStream> parse_interval_streams(const std::string& path);
std::vector<IntervalStream> parse_interval_streams_text(
    const std::string& text, const std::string& origin);
std::string interval_streams_to_string(std::span<const IntervalStream> s);
void serialize_interval_streams(std::span<const IntervalStream> s,
                                const std::string& path);

// Ensemble config (JSON): {"threshold": ..., "models": [{"path", "weight"},
// ...]}. Relative model paths resolve against the config file's directory.
// A missing threshold defaults to 0.5 with threshold_defaulted set so the
// caller can warn.
struct EnsembleModelRef {
  std::string path;
  double weight = 1.0;
};
struct EnsembleConfigFile {
  std::vector<EnsembleModelRef> models;
  double threshold = 0.5;
  bool threshold_defaulted = false;
};
EnsembleConfigFile parse_ensemble_config(const std::string& path);
EnsembleConfigFile parse_ensemble_config_text(const std::string& text,
                                              const std::string& base_dir,
                                              const std::string& origin);

// Class names: "id,name" lines (first comma splits).
std::map<int, std::string> parse_class_names(const std::string& path);

std::string eval_report_to_json(const EvalReport& r);
void write_eval_report(const EvalReport& r, const std::string& path);
std::string format_eval_table(const EvalReport& r,
                              const std::map<int, std::string>& names = {});

SimConfig parse_sim_config(const std::string& path);
SimConfig parse_sim_config_text(const std::string& text,
                                const std::string& origin);
std::string sim_config_to_json(const SimConfig& cfg);

SweepConfig parse_sweep_config(const std::string& path);
SweepConfig parse_sweep_config_text(const std::string& text,
                                    const std::string& origin);

std::string sweep_to_csv(const SweepTable& t);
void write_sweep_csv(const SweepTable& t, const std::string& path);
std::string format_sweep_table(const SweepTable& t);

}  // namespace talkit

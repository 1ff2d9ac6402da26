#pragma once

#include <span>
#include <utility>

#include "talkit/segment.hpp"

namespace talkit {

enum class Interpolation {
  kPoints101,  // mean of interpolated precision at recall 0.00..1.00
  kAllPoints,  // exact area under the interpolated PR curve
};

const char* interpolation_name(Interpolation interp);

struct EvalConfig {
  std::vector<double> thresholds{0.5, 0.75, 0.95};  // strictly increasing, in (0,1]
  int n_classes = 0;                                // C; all labels must be < C
  Interpolation interpolation = Interpolation::kPoints101;
  // Predictions for a video absent from the ground truth: error when
  // strict, silently dropped otherwise.
  bool strict_videos = true;
};

struct MatchResult {
  Segment prediction;
  bool matched = false;
};

// Greedy one-to-one matching for one video and one class. Predictions are
// taken in descending confidence order (ties: earlier start, earlier end);
// each grabs the unmatched annotation with the highest IoU provided that
// IoU >= iou_thr. Returns flags in that order.
std::vector<MatchResult> match_predictions(std::span<const Segment> preds,
                                           std::span<const Annotation> gts,
                                           double iou_thr);

// AP over a ranked list of (confidence, matched) flags with recall
// denominator n_gt. Flags must be sorted by non-increasing confidence
// (DomainError otherwise). Returns 0 when n_gt == 0; evaluate() excludes
// such classes from the mean instead.
double average_precision(std::span<const std::pair<double, bool>> flags,
                         long n_gt,
                         Interpolation interp = Interpolation::kPoints101);

struct EvalReport {
  std::vector<double> thresholds;
  int n_classes = 0;
  std::string interpolation;
  std::vector<int> classes_evaluated;  // classes with ground-truth instances
  std::vector<int> classes_excluded;   // ids in [0,C) absent from ground truth
  // class id -> AP per threshold, aligned with `thresholds`.
  std::map<int, std::vector<double>> ap;
  std::vector<double> map_per_threshold;  // mean over evaluated classes
  double final_score = 0.0;               // mean of map_per_threshold
  std::string note;                       // set for degenerate inputs
};

// Scores predictions against ground truth: per-video matching, AP pooled
// per class across videos, averaged over classes then over thresholds.
EvalReport evaluate(const PredictionSet& preds, const GroundTruth& gt,
                    const EvalConfig& cfg, int jobs = 0);
EvalReport evaluate_serial(const PredictionSet& preds, const GroundTruth& gt,
                           const EvalConfig& cfg);

}  // namespace talkit

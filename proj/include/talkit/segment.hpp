#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "talkit/error.hpp"

namespace talkit {

// Action class index. Valid action ids are 0..n_classes-1; the id equal to
// n_classes is reserved for the background ("no action") label. Background
// only ever appears in interval streams, never in segments or annotations.
using LabelId = int;

constexpr LabelId background_label(int n_classes) { return n_classes; }

// One localized action instance.
struct Segment {
  LabelId label = 0;
  double start = 0.0;  // seconds
  double end = 0.0;    // seconds; start < end
  double confidence = 0.0;  // [0,1]

  friend bool operator==(const Segment&, const Segment&) = default;
};

// Canonical segment order: (start, end, label, confidence).
inline bool segment_less(const Segment& a, const Segment& b) {
  if (a.start != b.start) return a.start < b.start;
  if (a.end != b.end) return a.end < b.end;
  if (a.label != b.label) return a.label < b.label;
  return a.confidence < b.confidence;
}

// All segments for a collection of videos, keyed by video id. A video may
// be present with an empty segment list (e.g. an all-background stream).
struct PredictionSet {
  std::map<std::string, std::vector<Segment>> videos;

  friend bool operator==(const PredictionSet&, const PredictionSet&) = default;
};

void canonicalize(PredictionSet& p);
std::size_t total_segments(const PredictionSet& p);

// One annotated action instance (no confidence).
struct Annotation {
  LabelId label = 0;
  double start = 0.0;
  double end = 0.0;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

inline bool annotation_less(const Annotation& a, const Annotation& b) {
  if (a.start != b.start) return a.start < b.start;
  if (a.end != b.end) return a.end < b.end;
  return a.label < b.label;
}

struct VideoGroundTruth {
  double duration = 0.0;  // seconds; every annotation fits in [0, duration]
  std::vector<Annotation> annotations;

  friend bool operator==(const VideoGroundTruth&,
                         const VideoGroundTruth&) = default;
};

struct GroundTruth {
  std::map<std::string, VideoGroundTruth> videos;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

void canonicalize(GroundTruth& g);
std::size_t total_annotations(const GroundTruth& g);

// Millisecond grid shared by candidate keys and the on-disk time format.
inline long long to_millis(double seconds) {
  return std::llround(seconds * 1000.0);
}
inline double from_millis(long long ms) {
  return static_cast<double>(ms) / 1000.0;
}

// |intersection| / |union| of two closed intervals; 0 when disjoint
// (touching endpoints have zero-measure intersection). Symmetric.
// Throws DomainError unless both intervals satisfy start < end.
double temporal_iou(double a_start, double a_end, double b_start,
                    double b_end);

inline double temporal_iou(const Segment& a, const Segment& b) {
  return temporal_iou(a.start, a.end, b.start, b.end);
}
inline double temporal_iou(const Segment& a, const Annotation& b) {
  return temporal_iou(a.start, a.end, b.start, b.end);
}
inline double temporal_iou(const Annotation& a, const Annotation& b) {
  return temporal_iou(a.start, a.end, b.start, b.end);
}

struct Violation {
  std::string video_id;
  std::size_t index = 0;  // index within the video's list
  std::string what;
};

// Diagnostic check; never throws. Empty result iff valid. n_classes == 0
// skips the label-range (and hence background) check.
std::vector<Violation> validate_prediction_set(const PredictionSet& p,
                                               int n_classes = 0);

std::vector<Violation> validate_ground_truth(const GroundTruth& g,
                                             int n_classes = 0);

std::string violations_to_string(const std::vector<Violation>& v);

}  // namespace talkit

#pragma once

#include <span>

#include "talkit/segment.hpp"

namespace talkit {

// Per-video sequence of fixed-width interval predictions, the boundary
// format between a clip classifier and the localizer. Entry k covers
// [k*t, (k+1)*t); the sub-t remainder of the video is dropped. Labels may
// include background_label(n_classes).
struct IntervalStream {
  std::string video_id;
  double interval = 0.0;  // t, seconds
  double duration = 0.0;  // L, seconds
  int n_classes = 0;

  struct Entry {
    LabelId label = 0;
    double confidence = 0.0;

    friend bool operator==(const Entry&, const Entry&) = default;
  };
  std::vector<Entry> entries;  // size must equal partition_count(duration, interval)

  friend bool operator==(const IntervalStream&,
                         const IntervalStream&) = default;
};

// floor(L/t): how many whole intervals fit in the video. Throws DomainError
// if L < 0 or t <= 0.
long partition_count(double duration, double interval);

struct MergeOptions {
  // Join two same-label runs separated by exactly one background interval.
  bool bridge_gaps = false;
  // Aggregate a run's confidence with the mean instead of the maximum.
  bool mean_confidence = false;
};

// Collapses maximal runs of consecutive same-label non-background entries
// into segments: start = run_start*t, end = one past the last interval,
// confidence = max (or mean) over the run. Background produces nothing and
// breaks runs. Throws DomainError if the stream violates its invariants.
std::vector<Segment> merge_stream(const IntervalStream& s,
                                  const MergeOptions& opts = {});

// merge_stream over every stream, assembled into a canonical PredictionSet.
// A video whose stream is all background keeps an (empty) entry. Throws
// InputError on duplicate video ids.
PredictionSet localize(std::span<const IntervalStream> streams,
                       const MergeOptions& opts = {}, int jobs = 0);
PredictionSet localize_serial(std::span<const IntervalStream> streams,
                              const MergeOptions& opts = {});

}  // namespace talkit

#pragma once

// Independent reference implementations used to cross-check the library.
// Everything here is written naively (explicit scans, no shared helpers
// beyond the documented formats) on purpose; keep it that way.

#include <cstdint>
#include <vector>

#include "talkit/evaluation.hpp"
#include "talkit/localizer.hpp"
#include "talkit/segment.hpp"
#include "talkit/simulator.hpp"

namespace oracles {

// Run-length merge of an interval stream, by direct index scanning.
std::vector<talkit::Segment> rle_merge(const talkit::IntervalStream& s,
                                       const talkit::MergeOptions& opts = {});

// Average precision by exhaustive PR-point enumeration (no running-max
// precomputation): for every query recall the whole ranked list is
// rescanned.
double ap_101(const std::vector<std::pair<double, bool>>& flags, long n_gt);
double ap_all_points(const std::vector<std::pair<double, bool>>& flags,
                     long n_gt);

// Brute-force scorer: own IoU, own greedy matcher, own pooling and AP.
double final_score(const talkit::PredictionSet& preds,
                   const talkit::GroundTruth& gt,
                   const std::vector<double>& thresholds, int n_classes,
                   bool points_101 = true);

// Per-(class, threshold) AP grid from the same scorer, keyed by class id.
std::map<int, std::vector<double>> ap_grid(
    const talkit::PredictionSet& preds, const talkit::GroundTruth& gt,
    const std::vector<double>& thresholds, int n_classes,
    bool points_101 = true);

// Replays the documented classifier RNG stream and recounts label flips.
// Also recomputes every expected entry; *streams_match is set to whether
// the streams agree entry for entry.
long replayed_flip_count(const talkit::GroundTruth& gt, double t,
                         const talkit::SimConfig& cfg, std::uint64_t seed,
                         const std::vector<talkit::IntervalStream>& streams,
                         bool* streams_match);

}  // namespace oracles

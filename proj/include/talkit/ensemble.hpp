#pragma once

#include <span>
#include <utility>

#include "talkit/segment.hpp"

namespace talkit {

// One model's predictions plus its fusion weight (in competition use the
// weight reflects the model's validation reliability).
struct WeightedModel {
  std::string model_id;
  double weight = 1.0;  // > 0
  PredictionSet predictions;
};

// Weighted average sum(w*c)/sum(w) of per-model confidences for one
// candidate segment. Throws DomainError on an empty list or a weight <= 0.
double fuse_confidences(
    std::span<const std::pair<double, double>> conf_weight);

struct EnsembleOptions {
  // Same-class segments merge when their IoU strictly exceeds this.
  double merge_threshold = 0.5;
  // Candidate-key time quantization, seconds. Segments whose boundaries
  // agree on this grid count as the same candidate across models.
  double key_resolution = 1e-3;
};

struct EnsembleStats {
  struct PerModel {
    std::string model_id;
    std::size_t segments = 0;
  };
  std::vector<PerModel> models;
  std::size_t candidates = 0;         // distinct candidate keys
  std::size_t shared_candidates = 0;  // keys contributed by >= 2 entries
  std::size_t merged_pairs = 0;       // pair merges applied by iou_merge
  std::size_t output_segments = 0;
};

// Builds the per-video candidate dictionary keyed by (class, start, end)
// on the key_resolution grid, collects per-model confidences, and fuses
// them. A candidate predicted by a single model keeps its own confidence.
// Candidate boundaries are the lexicographically smallest (start, end)
// among the contributors, so a single model passes through unchanged.
PredictionSet aggregate(std::span<const WeightedModel> models,
                        double key_resolution = 1e-3,
                        EnsembleStats* stats = nullptr);

// Within each video and class, repeatedly merges the pair with the highest
// IoU strictly above the threshold (ties: earliest pair in canonical
// order) into [min start, max end] with the maximum confidence, until no
// pair qualifies. Threshold must be in (0,1].
PredictionSet iou_merge(const PredictionSet& p, double threshold,
                        std::size_t* merged_pairs = nullptr);

// aggregate followed by iou_merge: the full fusion procedure.
PredictionSet ensemble_pipeline(std::span<const WeightedModel> models,
                                const EnsembleOptions& opts = {},
                                EnsembleStats* stats = nullptr, int jobs = 0);
PredictionSet ensemble_pipeline_serial(std::span<const WeightedModel> models,
                                       const EnsembleOptions& opts = {},
                                       EnsembleStats* stats = nullptr);

}  // namespace talkit

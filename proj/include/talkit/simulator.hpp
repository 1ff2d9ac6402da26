#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "talkit/evaluation.hpp"
#include "talkit/localizer.hpp"
#include "talkit/segment.hpp"

namespace talkit {

// Seed domains keep the ground-truth, classifier and sweep streams disjoint
// even when they share one base seed. docs/FORMATS.md spells out the exact
// draw order so tests can replay any stream independently.
inline constexpr std::uint64_t kGroundTruthDomain = 1;
inline constexpr std::uint64_t kClassifierDomain = 2;
inline constexpr std::uint64_t kSweepDomain = 3;

struct NoiseModel {
  double flip_prob = 0.0;        // per-interval label flip probability
  double conf_correct_min = 0.7;
  double conf_correct_max = 1.0;
  double conf_incorrect_min = 0.3;
  double conf_incorrect_max = 0.8;

  bool operator==(const NoiseModel&) const = default;
};

enum class IntervalLabelRule {
  kMidpoint,  // interval belongs to the action covering its midpoint
  kMajority,  // action covering more than half the interval, else background
};

const char* label_rule_name(IntervalLabelRule rule);

struct SimConfig {
  std::uint64_t seed = 1;
  int n_videos = 8;
  int n_classes = 38;
  double duration_min = 60.0;   // video length range, seconds
  double duration_max = 360.0;
  double actions_per_minute = 4.0;
  double action_min = 1.0;      // action length range, seconds
  double action_max = 10.0;
  bool allow_overlap = false;   // demo mode only; localization cannot win here
  double interval = 0.5;        // classifier interval width, seconds
  int n_models = 1;
  IntervalLabelRule label_rule = IntervalLabelRule::kMidpoint;
  NoiseModel noise;

  bool operator==(const SimConfig&) const = default;
};

// Throws DomainError on the first out-of-range field.
void validate_sim_config(const SimConfig& cfg);

// Deterministic in cfg.seed; actions are non-overlapping unless
// cfg.allow_overlap. Throws DomainError when drawn actions cannot fit in a
// video. jobs as in parallel_for.
GroundTruth generate_ground_truth(const SimConfig& cfg, int jobs = 0);
GroundTruth generate_ground_truth_serial(const SimConfig& cfg);

// One noisy interval classifier over gt, one stream per video (sorted by
// video id). True interval labels follow cfg.label_rule; with probability
// noise.flip_prob the label is replaced by a uniformly chosen wrong one.
// Deterministic in seed. The interval t must sit on the millisecond grid.
std::vector<IntervalStream> simulate_classifier(const GroundTruth& gt,
                                                double t,
                                                const SimConfig& cfg,
                                                std::uint64_t seed,
                                                int jobs = 0);
std::vector<IntervalStream> simulate_classifier_serial(const GroundTruth& gt,
                                                       double t,
                                                       const SimConfig& cfg,
                                                       std::uint64_t seed);

// Per-model seed used by the simulate command and by sweep.
std::uint64_t model_seed(std::uint64_t base_seed, int model_index);

struct SweepConfig {
  SimConfig base;
  std::vector<double> intervals{1.0, 0.5, 0.25};
  std::vector<double> noise_levels{0.0, 0.15};
  std::vector<int> ensemble_sizes{1, 3};
  int repeats = 1;
  double merge_threshold = 0.5;
  std::vector<double> eval_thresholds{0.5, 0.75, 0.95};

  bool operator==(const SweepConfig&) const = default;
};

struct SweepRow {
  double interval = 0.0;
  double noise = 0.0;
  int ensemble_size = 0;
  int repeat = 0;
  double final_score = 0.0;  // ensemble of the first ensemble_size models
  double best_single = 0.0;  // best individual model among those

  bool operator==(const SweepRow&) const = default;
};

struct SweepTable {
  std::vector<SweepRow> rows;  // interval-major, then noise, size, repeat
};

void validate_sweep_config(const SweepConfig& cfg);

// Full simulate -> localize -> (ensemble) -> evaluate grid. Model weights are
// the models' own standalone scores. Deterministic in cfg.base.seed.
SweepTable sweep(const SweepConfig& cfg, int jobs = 0);

}  // namespace talkit

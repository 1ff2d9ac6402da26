#include "talkit/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "talkit/ensemble.hpp"
#include "talkit/parallel.hpp"
#include "talkit/rng.hpp"

namespace talkit {

namespace {

// Millisecond grid value, rejecting anything that does not sit on it.
long long grid_millis(double seconds, const char* what) {
  const long long ms = to_millis(seconds);
  if (ms < 1 || std::fabs(seconds * 1000.0 - static_cast<double>(ms)) > 1e-6)
    throw DomainError(std::string(what) +
                      " must be a positive whole number of milliseconds");
  return ms;
}

double quantize_confidence(double c) {
  return static_cast<double>(std::llround(c * 1e6)) / 1e6;
}

std::string video_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "video_%04d", index);
  return buf;
}

void check_range(double lo, double hi, const char* what) {
  if (!(lo >= 0.0) || !(hi <= 1.0) || !(lo <= hi))
    throw DomainError(std::string(what) +
                      " must satisfy 0 <= min <= max <= 1");
}

// Draw order per video (seed = derive_seed(derive_seed(cfg.seed,
// kGroundTruthDomain), video_index)):
//   1. video length L_ms ~ uniform integer [duration_min_ms, duration_max_ms]
//   2. action count n ~ Poisson(actions_per_minute * L_ms / 60000)
//   3. n action lengths ~ uniform integer [action_min_ms, action_max_ms]
//      (then the fit check when overlap is disallowed)
//   4. n labels ~ uniform integer [0, n_classes)
//   5. placement: non-overlapping mode draws n+1 gap weights ~ uniform
//      [0,1) and splits the slack proportionally (skipped when n = 0);
//      overlap mode instead draws each start ~ uniform integer
//      [0, L_ms - length].
VideoGroundTruth one_video(const SimConfig& cfg, int index) {
  Rng rng(derive_seed(derive_seed(cfg.seed, kGroundTruthDomain),
                      static_cast<std::uint64_t>(index)));

  const long long dur_lo = grid_millis(cfg.duration_min, "duration_min");
  const long long dur_hi = grid_millis(cfg.duration_max, "duration_max");
  const long long act_lo = grid_millis(cfg.action_min, "action_min");
  const long long act_hi = grid_millis(cfg.action_max, "action_max");

  const long long length_ms = rng.next_int_in(dur_lo, dur_hi);
  const double lambda =
      cfg.actions_per_minute * static_cast<double>(length_ms) / 60000.0;
  const long n = rng.next_poisson(lambda);

  std::vector<long long> act_ms(static_cast<std::size_t>(n));
  for (auto& d : act_ms) d = rng.next_int_in(act_lo, act_hi);
  const long long used =
      std::accumulate(act_ms.begin(), act_ms.end(), 0ll);
  if (!cfg.allow_overlap && used > length_ms)
    throw DomainError(video_name(index) + ": actions cannot fit (" +
                      std::to_string(n) + " actions need " +
                      std::to_string(used) + " ms of " +
                      std::to_string(length_ms) + " ms)");

  std::vector<LabelId> labels(static_cast<std::size_t>(n));
  for (auto& l : labels)
    l = static_cast<LabelId>(
        rng.next_below(static_cast<std::uint64_t>(cfg.n_classes)));

  VideoGroundTruth video;
  video.duration = from_millis(length_ms);
  video.annotations.reserve(static_cast<std::size_t>(n));
  if (cfg.allow_overlap) {
    for (long i = 0; i < n; ++i) {
      const long long d = act_ms[static_cast<std::size_t>(i)];
      if (d > length_ms)
        throw DomainError(video_name(index) +
                          ": action longer than the video");
      const long long start = rng.next_int_in(0, length_ms - d);
      video.annotations.push_back({labels[static_cast<std::size_t>(i)],
                                   from_millis(start),
                                   from_millis(start + d)});
    }
  } else if (n > 0) {
    std::vector<double> weights(static_cast<std::size_t>(n) + 1);
    for (auto& w : weights) w = rng.next_double();
    const double total =
        std::accumulate(weights.begin(), weights.end(), 0.0);
    const double slack = static_cast<double>(length_ms - used);
    long long cursor = 0;
    for (long i = 0; i < n; ++i) {
      const long long gap =
          total > 0.0
              ? static_cast<long long>(std::floor(
                    slack * weights[static_cast<std::size_t>(i)] / total))
              : 0;
      cursor += gap;
      const long long d = act_ms[static_cast<std::size_t>(i)];
      video.annotations.push_back({labels[static_cast<std::size_t>(i)],
                                   from_millis(cursor),
                                   from_millis(cursor + d)});
      cursor += d;
    }
  }
  std::sort(video.annotations.begin(), video.annotations.end(),
            annotation_less);
  return video;
}

// True label of interval k under the configured rule, using exact
// millisecond arithmetic (annotation bounds are snapped to the grid).
LabelId true_interval_label(const std::vector<Annotation>& sorted,
                            long k, long long t_ms, int n_classes,
                            IntervalLabelRule rule) {
  if (rule == IntervalLabelRule::kMidpoint) {
    // midpoint (k + 1/2) * t, compared in half-millisecond units
    const long long mid2 = (2 * static_cast<long long>(k) + 1) * t_ms;
    for (const Annotation& a : sorted)
      if (2 * to_millis(a.start) <= mid2 && mid2 < 2 * to_millis(a.end))
        return a.label;
    return background_label(n_classes);
  }
  const long long lo = static_cast<long long>(k) * t_ms;
  const long long hi = lo + t_ms;
  long long best_overlap = 0;
  LabelId best = background_label(n_classes);
  for (const Annotation& a : sorted) {
    const long long ov = std::min(hi, to_millis(a.end)) -
                         std::max(lo, to_millis(a.start));
    if (ov > best_overlap) {
      best_overlap = ov;
      best = a.label;
    }
  }
  // majority means strictly more than half the interval
  return 2 * best_overlap > t_ms ? best : background_label(n_classes);
}

// Draw order per interval (seed = derive_seed(stream_seed, video_index)):
//   1. flip coin u ~ uniform [0,1); the label flips iff u < flip_prob
//   2. on a flip, one uniform integer in [0, n_classes) picks the wrong
//      label among the n_classes alternatives (background included)
//   3. confidence ~ uniform in the correct/incorrect range for the final
//      label, quantized to 1e-6
IntervalStream one_stream(const std::string& id,
                          const VideoGroundTruth& video, double t,
                          long long t_ms, const SimConfig& cfg,
                          std::uint64_t seed, int video_index) {
  IntervalStream s;
  s.video_id = id;
  s.interval = t;
  s.duration = video.duration;
  s.n_classes = cfg.n_classes;

  std::vector<Annotation> sorted = video.annotations;
  std::sort(sorted.begin(), sorted.end(), annotation_less);

  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(video_index)));
  const long count = partition_count(video.duration, t);
  s.entries.reserve(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) {
    const LabelId truth =
        true_interval_label(sorted, k, t_ms, cfg.n_classes, cfg.label_rule);
    LabelId label = truth;
    const double u = rng.next_double();
    if (u < cfg.noise.flip_prob) {
      const LabelId r = static_cast<LabelId>(
          rng.next_below(static_cast<std::uint64_t>(cfg.n_classes)));
      label = r + (r >= truth ? 1 : 0);
    }
    const bool correct = label == truth;
    const double conf =
        correct ? rng.next_in(cfg.noise.conf_correct_min,
                              cfg.noise.conf_correct_max)
                : rng.next_in(cfg.noise.conf_incorrect_min,
                              cfg.noise.conf_incorrect_max);
    s.entries.push_back({label, quantize_confidence(conf)});
  }
  return s;
}

// Runs body(i) for each index, serially or via parallel_for, and reports
// the lowest-index failure so error messages do not depend on the worker
// count.
template <typename Body>
void indexed_run(std::size_t n, int jobs, bool parallel, Body body) {
  std::vector<std::string> errors(n);
  auto guarded = [&](std::size_t i) {
    try {
      body(i);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  };
  if (parallel)
    parallel_for(n, jobs, guarded);
  else
    for (std::size_t i = 0; i < n; ++i) guarded(i);
  for (const std::string& e : errors)
    if (!e.empty()) throw DomainError(e);
}

GroundTruth generate_impl(const SimConfig& cfg, int jobs, bool parallel) {
  validate_sim_config(cfg);
  std::vector<VideoGroundTruth> videos(
      static_cast<std::size_t>(cfg.n_videos));
  indexed_run(videos.size(), jobs, parallel, [&](std::size_t i) {
    videos[i] = one_video(cfg, static_cast<int>(i));
  });
  GroundTruth gt;
  for (std::size_t i = 0; i < videos.size(); ++i)
    gt.videos.emplace(video_name(static_cast<int>(i)),
                      std::move(videos[i]));
  return gt;
}

std::vector<IntervalStream> simulate_impl(const GroundTruth& gt, double t,
                                          const SimConfig& cfg,
                                          std::uint64_t seed, int jobs,
                                          bool parallel) {
  if (cfg.n_classes < 1)
    throw DomainError("simulate_classifier: n_classes must be >= 1");
  if (!(cfg.noise.flip_prob >= 0.0) || !(cfg.noise.flip_prob <= 1.0))
    throw DomainError("simulate_classifier: flip_prob must be in [0,1]");
  check_range(cfg.noise.conf_correct_min, cfg.noise.conf_correct_max,
              "correct-confidence range");
  check_range(cfg.noise.conf_incorrect_min, cfg.noise.conf_incorrect_max,
              "incorrect-confidence range");
  const long long t_ms = grid_millis(t, "interval");
  auto violations = validate_ground_truth(gt, cfg.n_classes);
  if (!violations.empty())
    throw ValidationError("simulate_classifier: invalid ground truth:\n" +
                          violations_to_string(violations));

  std::vector<std::pair<const std::string*, const VideoGroundTruth*>> order;
  order.reserve(gt.videos.size());
  for (const auto& [id, video] : gt.videos) order.emplace_back(&id, &video);

  std::vector<IntervalStream> streams(order.size());
  indexed_run(order.size(), jobs, parallel, [&](std::size_t i) {
    streams[i] = one_stream(*order[i].first, *order[i].second, t, t_ms, cfg,
                            seed, static_cast<int>(i));
  });
  return streams;
}

struct SweepCell {
  std::size_t interval_index = 0;
  std::size_t noise_index = 0;
  int repeat = 0;
  std::vector<double> final_scores;  // aligned with cfg.ensemble_sizes
  std::vector<double> best_singles;
};

SweepCell run_cell(const SweepConfig& cfg, std::size_t ii, std::size_t ni,
                   int rep) {
  SweepCell cell{ii, ni, rep, {}, {}};

  SimConfig sim = cfg.base;
  sim.seed = derive_seed(derive_seed(cfg.base.seed, kSweepDomain),
                         static_cast<std::uint64_t>(rep));
  sim.interval = cfg.intervals[ii];
  sim.noise.flip_prob = cfg.noise_levels[ni];

  const GroundTruth gt = generate_ground_truth_serial(sim);
  EvalConfig eval_cfg;
  eval_cfg.thresholds = cfg.eval_thresholds;
  eval_cfg.n_classes = sim.n_classes;

  const int max_models =
      *std::max_element(cfg.ensemble_sizes.begin(), cfg.ensemble_sizes.end());
  std::vector<WeightedModel> models;
  std::vector<double> scores;
  models.reserve(static_cast<std::size_t>(max_models));
  for (int m = 0; m < max_models; ++m) {
    const auto streams = simulate_classifier_serial(
        gt, sim.interval, sim, model_seed(sim.seed, m));
    WeightedModel model;
    model.model_id = "model_" + std::to_string(m);
    model.predictions = localize_serial(streams);
    const double score =
        evaluate_serial(model.predictions, gt, eval_cfg).final_score;
    scores.push_back(score);
    // A hopeless model still needs a positive fusion weight.
    model.weight = std::max(score, 1e-6);
    models.push_back(std::move(model));
  }

  EnsembleOptions opts;
  opts.merge_threshold = cfg.merge_threshold;
  for (int size : cfg.ensemble_sizes) {
    const double best =
        *std::max_element(scores.begin(),
                          scores.begin() + static_cast<std::ptrdiff_t>(size));
    double final_score = scores[0];
    if (size > 1) {
      const std::span<const WeightedModel> subset(
          models.data(), static_cast<std::size_t>(size));
      const PredictionSet fused = ensemble_pipeline_serial(subset, opts);
      final_score = evaluate_serial(fused, gt, eval_cfg).final_score;
    }
    cell.final_scores.push_back(final_score);
    cell.best_singles.push_back(best);
  }
  return cell;
}

}  // namespace

const char* label_rule_name(IntervalLabelRule rule) {
  return rule == IntervalLabelRule::kMidpoint ? "midpoint" : "majority";
}

void validate_sim_config(const SimConfig& cfg) {
  if (cfg.n_videos < 0) throw DomainError("n_videos must be >= 0");
  if (cfg.n_classes < 1) throw DomainError("n_classes must be >= 1");
  grid_millis(cfg.duration_min, "duration_min");
  grid_millis(cfg.duration_max, "duration_max");
  if (cfg.duration_max < cfg.duration_min)
    throw DomainError("duration_max must be >= duration_min");
  if (!(cfg.actions_per_minute >= 0.0))
    throw DomainError("actions_per_minute must be >= 0");
  grid_millis(cfg.action_min, "action_min");
  grid_millis(cfg.action_max, "action_max");
  if (cfg.action_max < cfg.action_min)
    throw DomainError("action_max must be >= action_min");
  grid_millis(cfg.interval, "interval");
  if (cfg.n_models < 1) throw DomainError("n_models must be >= 1");
  if (!(cfg.noise.flip_prob >= 0.0) || !(cfg.noise.flip_prob <= 1.0))
    throw DomainError("flip_prob must be in [0,1]");
  check_range(cfg.noise.conf_correct_min, cfg.noise.conf_correct_max,
              "correct-confidence range");
  check_range(cfg.noise.conf_incorrect_min, cfg.noise.conf_incorrect_max,
              "incorrect-confidence range");
  // Poisson rate cap; keeps the product-method sampler exact.
  const double max_lambda =
      cfg.actions_per_minute * cfg.duration_max / 60.0;
  if (max_lambda > 500.0)
    throw DomainError(
        "actions_per_minute * duration_max / 60 must be <= 500");
}

GroundTruth generate_ground_truth(const SimConfig& cfg, int jobs) {
  return generate_impl(cfg, jobs, true);
}

GroundTruth generate_ground_truth_serial(const SimConfig& cfg) {
  return generate_impl(cfg, 1, false);
}

std::vector<IntervalStream> simulate_classifier(const GroundTruth& gt,
                                                double t,
                                                const SimConfig& cfg,
                                                std::uint64_t seed,
                                                int jobs) {
  return simulate_impl(gt, t, cfg, seed, jobs, true);
}

std::vector<IntervalStream> simulate_classifier_serial(
    const GroundTruth& gt, double t, const SimConfig& cfg,
    std::uint64_t seed) {
  return simulate_impl(gt, t, cfg, seed, 1, false);
}

std::uint64_t model_seed(std::uint64_t base_seed, int model_index) {
  return derive_seed(derive_seed(base_seed, kClassifierDomain),
                     static_cast<std::uint64_t>(model_index));
}

void validate_sweep_config(const SweepConfig& cfg) {
  validate_sim_config(cfg.base);
  if (cfg.intervals.empty()) throw DomainError("sweep: no intervals");
  for (double t : cfg.intervals) grid_millis(t, "sweep interval");
  if (cfg.noise_levels.empty()) throw DomainError("sweep: no noise levels");
  for (double e : cfg.noise_levels)
    if (!(e >= 0.0) || !(e <= 1.0))
      throw DomainError("sweep: noise levels must be in [0,1]");
  if (cfg.ensemble_sizes.empty())
    throw DomainError("sweep: no ensemble sizes");
  for (int s : cfg.ensemble_sizes)
    if (s < 1) throw DomainError("sweep: ensemble sizes must be >= 1");
  if (cfg.repeats < 1) throw DomainError("sweep: repeats must be >= 1");
  if (!(cfg.merge_threshold > 0.0) || cfg.merge_threshold > 1.0)
    throw DomainError("sweep: merge threshold must be in (0,1]");
  if (cfg.eval_thresholds.empty())
    throw DomainError("sweep: no evaluation thresholds");
  for (std::size_t i = 0; i < cfg.eval_thresholds.size(); ++i) {
    const double t = cfg.eval_thresholds[i];
    if (!(t > 0.0) || t > 1.0)
      throw DomainError("sweep: evaluation thresholds must be in (0,1]");
    if (i > 0 && !(t > cfg.eval_thresholds[i - 1]))
      throw DomainError(
          "sweep: evaluation thresholds must be strictly increasing");
  }
}

SweepTable sweep(const SweepConfig& cfg, int jobs) {
  validate_sweep_config(cfg);

  // One cell per (interval, noise, repeat); every ensemble size reuses the
  // cell's simulated models.
  struct CellKey {
    std::size_t ii, ni;
    int rep;
  };
  std::vector<CellKey> keys;
  for (std::size_t ii = 0; ii < cfg.intervals.size(); ++ii)
    for (std::size_t ni = 0; ni < cfg.noise_levels.size(); ++ni)
      for (int rep = 0; rep < cfg.repeats; ++rep)
        keys.push_back({ii, ni, rep});

  std::vector<SweepCell> cells(keys.size());
  indexed_run(keys.size(), jobs, true, [&](std::size_t i) {
    cells[i] = run_cell(cfg, keys[i].ii, keys[i].ni, keys[i].rep);
  });

  // interval-major row order, sizes before repeats
  SweepTable table;
  const std::size_t reps = static_cast<std::size_t>(cfg.repeats);
  for (std::size_t ii = 0; ii < cfg.intervals.size(); ++ii)
    for (std::size_t ni = 0; ni < cfg.noise_levels.size(); ++ni)
      for (std::size_t si = 0; si < cfg.ensemble_sizes.size(); ++si)
        for (std::size_t rep = 0; rep < reps; ++rep) {
          const SweepCell& cell =
              cells[(ii * cfg.noise_levels.size() + ni) * reps + rep];
          table.rows.push_back({cfg.intervals[ii], cfg.noise_levels[ni],
                                cfg.ensemble_sizes[si],
                                static_cast<int>(rep),
                                cell.final_scores[si],
                                cell.best_singles[si]});
        }
  return table;
}

}  // namespace talkit

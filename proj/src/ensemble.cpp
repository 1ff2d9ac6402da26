#include "talkit/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "talkit/parallel.hpp"

namespace talkit {

double fuse_confidences(
    std::span<const std::pair<double, double>> conf_weight) {
  if (conf_weight.empty())
    throw DomainError("fuse_confidences: empty confidence list");
  double num = 0.0, den = 0.0;
  for (const auto& [c, w] : conf_weight) {
    if (!(w > 0.0))
      throw DomainError("fuse_confidences: weight must be positive");
    num += w * c;
    den += w;
  }
  return num / den;
}

namespace {

using CandidateKey = std::tuple<LabelId, long long, long long>;

struct Candidate {
  double start = 0.0;
  double end = 0.0;
  std::vector<std::pair<double, double>> contribs;  // (confidence, weight)
};

void verify_models(std::span<const WeightedModel> models) {
  if (models.empty()) throw DomainError("ensemble: zero models");
  for (const auto& m : models) {
    if (!(m.weight > 0.0))
      throw DomainError("ensemble: model '" + m.model_id +
                        "' has non-positive weight");
    auto violations = validate_prediction_set(m.predictions);
    if (!violations.empty())
      throw ValidationError("ensemble: model '" + m.model_id +
                            "' predictions invalid:\n" +
                            violations_to_string(violations));
  }
}

// Fuses all models' segments for a single video. Contributions are sorted
// before summing so the result is identical for any model order.
std::vector<Segment> fuse_video(std::span<const WeightedModel> models,
                                const std::string& video_id,
                                double key_resolution,
                                std::size_t* candidates,
                                std::size_t* shared_candidates) {
  std::map<CandidateKey, Candidate> table;
  for (const auto& m : models) {
    auto it = m.predictions.videos.find(video_id);
    if (it == m.predictions.videos.end()) continue;
    for (const Segment& s : it->second) {
      CandidateKey key{s.label, std::llround(s.start / key_resolution),
                       std::llround(s.end / key_resolution)};
      auto [slot, inserted] = table.try_emplace(key);
      Candidate& c = slot->second;
      if (inserted || s.start < c.start ||
          (s.start == c.start && s.end < c.end)) {
        c.start = s.start;
        c.end = s.end;
      }
      c.contribs.emplace_back(s.confidence, m.weight);
    }
  }

  std::vector<Segment> out;
  out.reserve(table.size());
  for (auto& [key, c] : table) {
    std::sort(c.contribs.begin(), c.contribs.end());
    Segment s;
    s.label = std::get<0>(key);
    s.start = c.start;
    s.end = c.end;
    s.confidence = fuse_confidences(c.contribs);
    out.push_back(s);
    if (candidates) ++*candidates;
    if (shared_candidates && c.contribs.size() >= 2) ++*shared_candidates;
  }
  std::sort(out.begin(), out.end(), segment_less);
  return out;
}

// Fixed-point union merge for the same-class segments of one video.
std::vector<Segment> merge_class_segments(std::vector<Segment> segs,
                                          double threshold,
                                          std::size_t* merged_pairs) {
  std::sort(segs.begin(), segs.end(), segment_less);
  for (;;) {
    double best_iou = -1.0;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
      for (std::size_t j = i + 1; j < segs.size(); ++j) {
        const double iou = temporal_iou(segs[i], segs[j]);
        if (iou > threshold && iou > best_iou) {
          best_iou = iou;
          bi = i;
          bj = j;
        }
      }
    }
    if (best_iou < 0.0) break;
    Segment merged;
    merged.label = segs[bi].label;
    merged.start = std::min(segs[bi].start, segs[bj].start);
    merged.end = std::max(segs[bi].end, segs[bj].end);
    merged.confidence = std::max(segs[bi].confidence, segs[bj].confidence);
    segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(bj));
    segs[bi] = merged;
    std::sort(segs.begin(), segs.end(), segment_less);
    if (merged_pairs) ++*merged_pairs;
  }
  return segs;
}

std::vector<Segment> merge_video_segments(const std::vector<Segment>& segs,
                                          double threshold,
                                          std::size_t* merged_pairs) {
  std::map<LabelId, std::vector<Segment>> by_class;
  for (const Segment& s : segs) by_class[s.label].push_back(s);
  std::vector<Segment> out;
  out.reserve(segs.size());
  for (auto& [label, group] : by_class) {
    auto merged = merge_class_segments(std::move(group), threshold,
                                       merged_pairs);
    out.insert(out.end(), merged.begin(), merged.end());
  }
  std::sort(out.begin(), out.end(), segment_less);
  return out;
}

void check_threshold(double threshold) {
  if (!(threshold > 0.0) || threshold > 1.0)
    throw DomainError("iou_merge: threshold must be in (0,1]");
}

std::vector<std::string> video_union(std::span<const WeightedModel> models) {
  std::set<std::string> ids;
  for (const auto& m : models)
    for (const auto& [id, segs] : m.predictions.videos) ids.insert(id);
  return {ids.begin(), ids.end()};
}

void fill_model_stats(std::span<const WeightedModel> models,
                      EnsembleStats& stats) {
  stats = EnsembleStats{};
  for (const auto& m : models)
    stats.models.push_back({m.model_id, total_segments(m.predictions)});
}

}  // namespace

PredictionSet aggregate(std::span<const WeightedModel> models,
                        double key_resolution, EnsembleStats* stats) {
  verify_models(models);
  if (!(key_resolution > 0.0))
    throw DomainError("aggregate: key resolution must be positive");
  if (stats) fill_model_stats(models, *stats);

  PredictionSet out;
  for (const auto& id : video_union(models)) {
    out.videos.emplace(
        id, fuse_video(models, id, key_resolution,
                       stats ? &stats->candidates : nullptr,
                       stats ? &stats->shared_candidates : nullptr));
  }
  if (stats) stats->output_segments = total_segments(out);
  return out;
}

PredictionSet iou_merge(const PredictionSet& p, double threshold,
                        std::size_t* merged_pairs) {
  check_threshold(threshold);
  auto violations = validate_prediction_set(p);
  if (!violations.empty())
    throw ValidationError("iou_merge: invalid prediction set:\n" +
                          violations_to_string(violations));
  PredictionSet out;
  for (const auto& [id, segs] : p.videos)
    out.videos.emplace(id,
                       merge_video_segments(segs, threshold, merged_pairs));
  return out;
}

PredictionSet ensemble_pipeline(std::span<const WeightedModel> models,
                                const EnsembleOptions& opts,
                                EnsembleStats* stats, int jobs) {
  verify_models(models);
  check_threshold(opts.merge_threshold);
  if (!(opts.key_resolution > 0.0))
    throw DomainError("aggregate: key resolution must be positive");
  if (stats) fill_model_stats(models, *stats);

  const auto ids = video_union(models);
  std::vector<std::vector<Segment>> fused(ids.size());
  std::vector<std::size_t> candidates(ids.size(), 0);
  std::vector<std::size_t> shared(ids.size(), 0);
  std::vector<std::size_t> merged(ids.size(), 0);

  parallel_for(ids.size(), jobs, [&](std::size_t i) {
    auto segs = fuse_video(models, ids[i], opts.key_resolution,
                           &candidates[i], &shared[i]);
    fused[i] = merge_video_segments(segs, opts.merge_threshold, &merged[i]);
  });

  PredictionSet out;
  for (std::size_t i = 0; i < ids.size(); ++i)
    out.videos.emplace(ids[i], std::move(fused[i]));
  if (stats) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      stats->candidates += candidates[i];
      stats->shared_candidates += shared[i];
      stats->merged_pairs += merged[i];
    }
    stats->output_segments = total_segments(out);
  }
  return out;
}

PredictionSet ensemble_pipeline_serial(std::span<const WeightedModel> models,
                                       const EnsembleOptions& opts,
                                       EnsembleStats* stats) {
  PredictionSet fused = aggregate(models, opts.key_resolution, stats);
  PredictionSet out = iou_merge(fused, opts.merge_threshold,
                                stats ? &stats->merged_pairs : nullptr);
  if (stats) stats->output_segments = total_segments(out);
  return out;
}

}  // namespace talkit

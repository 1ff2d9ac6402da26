#include "talkit/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "talkit/parallel.hpp"

namespace talkit {

const char* interpolation_name(Interpolation interp) {
  return interp == Interpolation::kPoints101 ? "101-point" : "all-point";
}

std::vector<MatchResult> match_predictions(std::span<const Segment> preds,
                                           std::span<const Annotation> gts,
                                           double iou_thr) {
  std::vector<MatchResult> out;
  out.reserve(preds.size());
  for (const Segment& s : preds) out.push_back({s, false});
  std::stable_sort(out.begin(), out.end(),
                   [](const MatchResult& a, const MatchResult& b) {
                     if (a.prediction.confidence != b.prediction.confidence)
                       return a.prediction.confidence > b.prediction.confidence;
                     if (a.prediction.start != b.prediction.start)
                       return a.prediction.start < b.prediction.start;
                     return a.prediction.end < b.prediction.end;
                   });

  std::vector<bool> taken(gts.size(), false);
  for (MatchResult& r : out) {
    double best_iou = -1.0;
    std::size_t best = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double iou = temporal_iou(r.prediction, gts[g]);
      if (iou > best_iou) {
        best_iou = iou;
        best = g;
      }
    }
    if (best < gts.size() && best_iou >= iou_thr) {
      taken[best] = true;
      r.matched = true;
    }
  }
  return out;
}

double average_precision(std::span<const std::pair<double, bool>> flags,
                         long n_gt, Interpolation interp) {
  for (std::size_t i = 1; i < flags.size(); ++i)
    if (flags[i].first > flags[i - 1].first)
      throw DomainError(
          "average_precision: flags not sorted by descending confidence");
  if (n_gt <= 0) return 0.0;
  if (flags.empty()) return 0.0;

  const std::size_t n = flags.size();
  std::vector<double> prec(n), rec(n);
  long tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (flags[i].second) ++tp;
    prec[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    rec[i] = static_cast<double>(tp) / static_cast<double>(n_gt);
  }
  // Interpolated precision: max precision among points at recall >= r.
  std::vector<double> pmax(n);
  pmax[n - 1] = prec[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    pmax[i] = std::max(prec[i], pmax[i + 1]);

  if (interp == Interpolation::kPoints101) {
    double sum = 0.0;
    std::size_t idx = 0;
    for (int j = 0; j <= 100; ++j) {
      const double r = static_cast<double>(j) / 100.0;
      while (idx < n && rec[idx] < r) ++idx;
      if (idx == n) break;
      sum += pmax[idx];
    }
    return sum / 101.0;
  }
  double ap = 0.0;
  double prev_rec = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!flags[i].second) continue;
    ap += (rec[i] - prev_rec) * pmax[i];
    prev_rec = rec[i];
  }
  return ap;
}

namespace {

void verify_config(const EvalConfig& cfg) {
  if (cfg.n_classes < 1)
    throw DomainError("evaluate: class count must be >= 1");
  if (cfg.thresholds.empty())
    throw DomainError("evaluate: threshold set must be non-empty");
  for (std::size_t i = 0; i < cfg.thresholds.size(); ++i) {
    const double t = cfg.thresholds[i];
    if (!(t > 0.0) || t > 1.0)
      throw DomainError("evaluate: thresholds must be in (0,1]");
    if (i > 0 && !(t > cfg.thresholds[i - 1]))
      throw DomainError("evaluate: thresholds must be strictly increasing");
  }
}

struct RankedFlag {
  double confidence;
  double start;
  double end;
  const std::string* video_id;
  bool matched;
};

// Confidence ties break by (earlier start, video id, earlier end) so the
// pooled ranking is deterministic. A matched flag ranks ahead of its
// identical twin; without this, exact duplicates would sort by input
// permutation.
bool ranked_less(const RankedFlag& a, const RankedFlag& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  if (a.start != b.start) return a.start < b.start;
  if (const int c = a.video_id->compare(*b.video_id); c != 0) return c < 0;
  if (a.end != b.end) return a.end < b.end;
  return a.matched > b.matched;
}

struct VideoSlice {
  const std::string* video_id;
  std::vector<Segment> preds;      // one class only
  std::vector<Annotation> gts;     // one class only
};

// All per-video data for one evaluated class.
struct ClassData {
  int label = 0;
  long n_gt = 0;
  std::vector<VideoSlice> videos;
};

std::vector<double> class_ap_row(const ClassData& data,
                                 const EvalConfig& cfg) {
  std::vector<double> row(cfg.thresholds.size(), 0.0);
  for (std::size_t ti = 0; ti < cfg.thresholds.size(); ++ti) {
    std::vector<RankedFlag> flags;
    for (const VideoSlice& v : data.videos) {
      auto matches = match_predictions(v.preds, v.gts, cfg.thresholds[ti]);
      for (const MatchResult& m : matches)
        flags.push_back({m.prediction.confidence, m.prediction.start,
                         m.prediction.end, v.video_id, m.matched});
    }
    std::sort(flags.begin(), flags.end(), ranked_less);
    std::vector<std::pair<double, bool>> ranked;
    ranked.reserve(flags.size());
    for (const RankedFlag& f : flags)
      ranked.emplace_back(f.confidence, f.matched);
    row[ti] = average_precision(ranked, data.n_gt, cfg.interpolation);
  }
  return row;
}

EvalReport evaluate_impl(const PredictionSet& preds, const GroundTruth& gt,
                         const EvalConfig& cfg, int jobs, bool parallel) {
  verify_config(cfg);

  auto pred_violations = validate_prediction_set(preds, cfg.n_classes);
  if (!pred_violations.empty())
    throw ValidationError("evaluate: invalid predictions:\n" +
                          violations_to_string(pred_violations));
  auto gt_violations = validate_ground_truth(gt, cfg.n_classes);
  if (!gt_violations.empty())
    throw ValidationError("evaluate: invalid ground truth:\n" +
                          violations_to_string(gt_violations));

  std::size_t known_pred_segments = 0;
  for (const auto& [id, segs] : preds.videos) {
    if (gt.videos.count(id) == 0) {
      if (cfg.strict_videos)
        throw InputError("evaluate: prediction for unknown video '" + id +
                         "'");
      continue;  // lenient: dropped
    }
    known_pred_segments += segs.size();
  }

  std::vector<long> n_gt(static_cast<std::size_t>(cfg.n_classes), 0);
  for (const auto& [id, video] : gt.videos)
    for (const Annotation& a : video.annotations)
      ++n_gt[static_cast<std::size_t>(a.label)];

  EvalReport report;
  report.thresholds = cfg.thresholds;
  report.n_classes = cfg.n_classes;
  report.interpolation = interpolation_name(cfg.interpolation);
  for (int c = 0; c < cfg.n_classes; ++c) {
    if (n_gt[static_cast<std::size_t>(c)] > 0)
      report.classes_evaluated.push_back(c);
    else
      report.classes_excluded.push_back(c);
  }

  if (report.classes_evaluated.empty()) {
    // Vacuous case: nothing to detect. Empty predictions are perfect,
    // anything else is pure false positives.
    report.final_score = known_pred_segments == 0 ? 1.0 : 0.0;
    report.map_per_threshold.assign(cfg.thresholds.size(),
                                    report.final_score);
    report.note = "no ground-truth instances for any class";
    return report;
  }

  // Slice predictions and annotations per (class, video) once.
  std::map<int, ClassData> data;
  for (int c : report.classes_evaluated) {
    data[c].label = c;
    data[c].n_gt = n_gt[static_cast<std::size_t>(c)];
  }
  for (const auto& [id, video] : gt.videos) {
    std::map<int, VideoSlice> slices;
    for (const Annotation& a : video.annotations)
      slices[a.label].gts.push_back(a);
    if (auto it = preds.videos.find(id); it != preds.videos.end())
      for (const Segment& s : it->second)
        if (n_gt[static_cast<std::size_t>(s.label)] > 0)
          slices[s.label].preds.push_back(s);
    for (auto& [label, slice] : slices) {
      slice.video_id = &id;  // map keys are stable
      data[label].videos.push_back(std::move(slice));
    }
  }

  const auto& classes = report.classes_evaluated;
  std::vector<std::vector<double>> rows(classes.size());
  auto worker = [&](std::size_t i) {
    rows[i] = class_ap_row(data[classes[i]], cfg);
  };
  if (parallel)
    parallel_for(classes.size(), jobs, worker);
  else
    for (std::size_t i = 0; i < classes.size(); ++i) worker(i);

  for (std::size_t i = 0; i < classes.size(); ++i)
    report.ap.emplace(classes[i], rows[i]);

  report.map_per_threshold.assign(cfg.thresholds.size(), 0.0);
  for (std::size_t ti = 0; ti < cfg.thresholds.size(); ++ti) {
    double sum = 0.0;
    for (std::size_t i = 0; i < classes.size(); ++i) sum += rows[i][ti];
    report.map_per_threshold[ti] = sum / static_cast<double>(classes.size());
  }
  double sum = 0.0;
  for (double m : report.map_per_threshold) sum += m;
  report.final_score =
      sum / static_cast<double>(report.map_per_threshold.size());
  return report;
}

}  // namespace

EvalReport evaluate(const PredictionSet& preds, const GroundTruth& gt,
                    const EvalConfig& cfg, int jobs) {
  return evaluate_impl(preds, gt, cfg, jobs, true);
}

EvalReport evaluate_serial(const PredictionSet& preds, const GroundTruth& gt,
                           const EvalConfig& cfg) {
  return evaluate_impl(preds, gt, cfg, 1, false);
}

}  // namespace talkit

#include "talkit/segment.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace talkit {

void canonicalize(PredictionSet& p) {
  for (auto& [id, segments] : p.videos)
    std::sort(segments.begin(), segments.end(), segment_less);
}

std::size_t total_segments(const PredictionSet& p) {
  std::size_t n = 0;
  for (const auto& [id, segments] : p.videos) n += segments.size();
  return n;
}

void canonicalize(GroundTruth& g) {
  for (auto& [id, video] : g.videos)
    std::sort(video.annotations.begin(), video.annotations.end(),
              annotation_less);
}

std::size_t total_annotations(const GroundTruth& g) {
  std::size_t n = 0;
  for (const auto& [id, video] : g.videos) n += video.annotations.size();
  return n;
}

double temporal_iou(double a_start, double a_end, double b_start,
                    double b_end) {
  if (!(a_start < a_end) || !(b_start < b_end))
    throw DomainError("temporal_iou: interval must satisfy start < end");
  const double inter =
      std::min(a_end, b_end) - std::max(a_start, b_start);
  if (inter <= 0.0) return 0.0;
  const double uni = std::max(a_end, b_end) - std::min(a_start, b_start);
  return inter / uni;
}

namespace {

void check_interval(std::vector<Violation>& out, const std::string& video_id,
                    std::size_t index, double start, double end, LabelId label,
                    int n_classes) {
  if (start < 0.0)
    out.push_back({video_id, index, "negative start time"});
  if (!(start < end))
    out.push_back({video_id, index, "empty interval (start >= end)"});
  if (label < 0)
    out.push_back({video_id, index, "negative label id"});
  else if (n_classes > 0 && label >= n_classes)
    out.push_back({video_id, index,
                   label == background_label(n_classes)
                       ? "background label"
                       : "label id out of range"});
}

}  // namespace

std::vector<Violation> validate_prediction_set(const PredictionSet& p,
                                               int n_classes) {
  std::vector<Violation> out;
  for (const auto& [video_id, segments] : p.videos) {
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const Segment& s = segments[i];
      check_interval(out, video_id, i, s.start, s.end, s.label, n_classes);
      if (s.confidence < 0.0 || s.confidence > 1.0)
        out.push_back({video_id, i, "confidence out of [0,1] range"});
    }
  }
  return out;
}

std::vector<Violation> validate_ground_truth(const GroundTruth& g,
                                             int n_classes) {
  std::vector<Violation> out;
  for (const auto& [video_id, video] : g.videos) {
    if (!(video.duration > 0.0))
      out.push_back({video_id, 0, "non-positive video duration"});
    std::set<std::tuple<LabelId, long long, long long>> seen;
    for (std::size_t i = 0; i < video.annotations.size(); ++i) {
      const Annotation& a = video.annotations[i];
      check_interval(out, video_id, i, a.start, a.end, a.label, n_classes);
      if (a.end > video.duration)
        out.push_back({video_id, i, "annotation ends after video duration"});
      auto key = std::make_tuple(a.label, to_millis(a.start), to_millis(a.end));
      if (!seen.insert(key).second)
        out.push_back({video_id, i, "duplicate annotation"});
    }
  }
  return out;
}

std::string violations_to_string(const std::vector<Violation>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << '\n';
    os << v[i].video_id << '[' << v[i].index << "]: " << v[i].what;
  }
  return os.str();
}

}  // namespace talkit

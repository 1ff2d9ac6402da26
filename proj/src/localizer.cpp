#include "talkit/localizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "talkit/parallel.hpp"

namespace talkit {

long partition_count(double duration, double interval) {
  if (!(interval > 0.0))
    throw DomainError("partition_count: interval must be positive");
  if (duration < 0.0)
    throw DomainError("partition_count: negative duration");
  // The nudge keeps exact multiples exact when the interval is a
  // non-dyadic decimal (60.0/0.1 evaluates below 600 in doubles).
  return static_cast<long>(std::floor(duration / interval + 1e-9));
}

namespace {

struct Run {
  LabelId label;
  std::size_t first;  // entry index of the first interval
  std::size_t last;   // entry index of the last interval, inclusive
  double max_conf;
  double sum_conf;
  std::size_t count;
};

void verify_stream(const IntervalStream& s) {
  if (s.n_classes < 1)
    throw DomainError("interval stream: n_classes must be >= 1 (video '" +
                      s.video_id + "')");
  const long expected = partition_count(s.duration, s.interval);
  if (static_cast<long>(s.entries.size()) != expected) {
    std::ostringstream os;
    os << "interval stream for video '" << s.video_id << "': expected "
       << expected << " records (floor(L/t) with L=" << s.duration
       << ", t=" << s.interval << "), got " << s.entries.size();
    throw DomainError(os.str());
  }
  const LabelId bg = background_label(s.n_classes);
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    const auto& e = s.entries[i];
    if (e.label < 0 || e.label > bg) {
      std::ostringstream os;
      os << "interval stream for video '" << s.video_id << "': entry " << i
         << " label " << e.label << " outside [0," << bg << "]";
      throw DomainError(os.str());
    }
    if (e.confidence < 0.0 || e.confidence > 1.0) {
      std::ostringstream os;
      os << "interval stream for video '" << s.video_id << "': entry " << i
         << " confidence out of [0,1]";
      throw DomainError(os.str());
    }
  }
}

}  // namespace

std::vector<Segment> merge_stream(const IntervalStream& s,
                                  const MergeOptions& opts) {
  verify_stream(s);
  const LabelId bg = background_label(s.n_classes);

  std::vector<Run> runs;
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    const auto& e = s.entries[i];
    if (e.label == bg) continue;
    if (!runs.empty() && runs.back().label == e.label &&
        runs.back().last + 1 == i) {
      Run& r = runs.back();
      r.last = i;
      r.max_conf = std::max(r.max_conf, e.confidence);
      r.sum_conf += e.confidence;
      r.count += 1;
    } else {
      runs.push_back({e.label, i, i, e.confidence, e.confidence, 1});
    }
  }

  if (opts.bridge_gaps) {
    std::vector<Run> bridged;
    for (const Run& r : runs) {
      if (!bridged.empty() && bridged.back().label == r.label &&
          bridged.back().last + 2 == r.first) {
        Run& b = bridged.back();
        b.last = r.last;
        b.max_conf = std::max(b.max_conf, r.max_conf);
        b.sum_conf += r.sum_conf;
        b.count += r.count;
      } else {
        bridged.push_back(r);
      }
    }
    runs = std::move(bridged);
  }

  std::vector<Segment> out;
  out.reserve(runs.size());
  for (const Run& r : runs) {
    Segment seg;
    seg.label = r.label;
    seg.start = static_cast<double>(r.first) * s.interval;
    seg.end = static_cast<double>(r.last + 1) * s.interval;
    seg.confidence = opts.mean_confidence
                         ? r.sum_conf / static_cast<double>(r.count)
                         : r.max_conf;
    out.push_back(seg);
  }
  std::sort(out.begin(), out.end(), segment_less);
  return out;
}

namespace {

void check_unique_ids(std::span<const IntervalStream> streams) {
  std::map<std::string, int> seen;
  for (const auto& s : streams) {
    if (++seen[s.video_id] == 2)
      throw InputError("localize: duplicate video id '" + s.video_id + "'");
  }
}

}  // namespace

PredictionSet localize(std::span<const IntervalStream> streams,
                       const MergeOptions& opts, int jobs) {
  check_unique_ids(streams);
  for (const auto& s : streams) verify_stream(s);

  std::vector<std::vector<Segment>> merged(streams.size());
  parallel_for(streams.size(), jobs,
               [&](std::size_t i) { merged[i] = merge_stream(streams[i], opts); });

  PredictionSet out;
  for (std::size_t i = 0; i < streams.size(); ++i)
    out.videos.emplace(streams[i].video_id, std::move(merged[i]));
  return out;
}

PredictionSet localize_serial(std::span<const IntervalStream> streams,
                              const MergeOptions& opts) {
  check_unique_ids(streams);
  PredictionSet out;
  for (const auto& s : streams)
    out.videos.emplace(s.video_id, merge_stream(s, opts));
  return out;
}

}  // namespace talkit

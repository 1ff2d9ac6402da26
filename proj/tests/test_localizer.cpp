#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "talkit/localizer.hpp"
#include "talkit/rng.hpp"

using namespace talkit;

namespace {

IntervalStream make_stream(std::vector<IntervalStream::Entry> entries,
                           double t = 0.5, int n_classes = 2,
                           const std::string& id = "v") {
  IntervalStream s;
  s.video_id = id;
  s.interval = t;
  s.duration = t * static_cast<double>(entries.size());
  s.n_classes = n_classes;
  s.entries = std::move(entries);
  return s;
}

}  // namespace

TEST_CASE("partition_count floors and guards") {
  CHECK(partition_count(6.0, 0.5) == 12);
  CHECK(partition_count(6.3, 0.5) == 12);
  CHECK(partition_count(0.4, 0.5) == 0);
  CHECK(partition_count(0.0, 1.0) == 0);
  CHECK(partition_count(60.0, 0.1) == 600);  // non-dyadic interval
  CHECK(partition_count(2.5, 0.5) == 5);
  CHECK_THROWS_AS(partition_count(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(partition_count(1.0, -0.5), DomainError);
  CHECK_THROWS_AS(partition_count(-1.0, 0.5), DomainError);
}

TEST_CASE("merge_stream collapses same-label runs") {
  // labels A,A,B,bg,A with A=0, B=1, background=2
  const auto s = make_stream(
      {{0, 0.7}, {0, 0.9}, {1, 0.5}, {2, 0.3}, {0, 0.6}});
  const auto segs = merge_stream(s);
  REQUIRE(segs.size() == 3);
  CHECK(segs[0] == Segment{0, 0.0, 1.0, 0.9});
  CHECK(segs[1] == Segment{1, 1.0, 1.5, 0.5});
  CHECK(segs[2] == Segment{0, 2.0, 2.5, 0.6});
}

TEST_CASE("merge_stream all background yields nothing") {
  const auto s = make_stream({{2, 0.3}, {2, 0.9}, {2, 0.1}}, 1.0);
  CHECK(merge_stream(s).empty());
}

TEST_CASE("merge_stream single run spans the whole stream") {
  std::vector<IntervalStream::Entry> entries(8, {0, 0.4});
  const auto segs = merge_stream(make_stream(std::move(entries), 0.25));
  REQUIRE(segs.size() == 1);
  CHECK(segs[0] == Segment{0, 0.0, 2.0, 0.4});
}

TEST_CASE("merge_stream gap bridging is off by default") {
  // A, bg, A
  const auto s = make_stream({{0, 0.5}, {2, 0.1}, {0, 0.8}});
  CHECK(merge_stream(s).size() == 2);

  MergeOptions bridge;
  bridge.bridge_gaps = true;
  const auto segs = merge_stream(s, bridge);
  REQUIRE(segs.size() == 1);
  CHECK(segs[0] == Segment{0, 0.0, 1.5, 0.8});
}

TEST_CASE("gap bridging joins only across background") {
  // A, B, A: the middle run is a different action, not background
  const auto s = make_stream({{0, 0.5}, {1, 0.6}, {0, 0.8}});
  MergeOptions bridge;
  bridge.bridge_gaps = true;
  CHECK(merge_stream(s, bridge).size() == 3);

  // two-interval background gap never bridges
  const auto wide = make_stream({{0, 0.5}, {2, 0.1}, {2, 0.1}, {0, 0.8}});
  CHECK(merge_stream(wide, bridge).size() == 2);
}

TEST_CASE("mean confidence option") {
  const auto s = make_stream({{0, 0.2}, {0, 0.4}, {0, 0.9}});
  MergeOptions mean;
  mean.mean_confidence = true;
  const auto segs = merge_stream(s, mean);
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].confidence == doctest::Approx(0.5));
  CHECK(merge_stream(s)[0].confidence == 0.9);
}

TEST_CASE("merge_stream validates its input") {
  auto s = make_stream({{0, 0.5}, {1, 0.5}});
  s.entries.pop_back();  // record count no longer floor(L/t)
  CHECK_THROWS_AS(merge_stream(s), DomainError);

  auto bad_label = make_stream({{3, 0.5}});  // beyond background (=2)
  CHECK_THROWS_AS(merge_stream(bad_label), DomainError);

  auto bad_conf = make_stream({{0, 1.5}});
  CHECK_THROWS_AS(merge_stream(bad_conf), DomainError);

  auto no_classes = make_stream({{0, 0.5}}, 0.5, 0);
  CHECK_THROWS_AS(merge_stream(no_classes), DomainError);
}

TEST_CASE("merge_stream equals the run-length oracle") {
  Rng rng(21);
  for (int iter = 0; iter < 1500; ++iter) {
    const int n_classes = 1 + static_cast<int>(rng.next_below(3));
    const long len = static_cast<long>(rng.next_below(11));
    std::vector<IntervalStream::Entry> entries;
    for (long i = 0; i < len; ++i)
      entries.push_back(
          {static_cast<LabelId>(rng.next_below(
               static_cast<std::uint64_t>(n_classes + 1))),
           rng.next_in(0.0, 1.0)});
    auto s = make_stream(std::move(entries), 0.5, n_classes);
    MergeOptions opts;
    opts.bridge_gaps = rng.next_below(2) == 1;
    opts.mean_confidence = rng.next_below(2) == 1;
    CHECK(merge_stream(s, opts) == oracles::rle_merge(s, opts));
  }
}

TEST_CASE("merged segments never touch and confidences reconstruct") {
  Rng rng(22);
  for (int iter = 0; iter < 300; ++iter) {
    const long len = 1 + static_cast<long>(rng.next_below(40));
    std::vector<IntervalStream::Entry> entries;
    for (long i = 0; i < len; ++i)
      entries.push_back({static_cast<LabelId>(rng.next_below(4)),
                         rng.next_in(0.0, 1.0)});
    const auto s = make_stream(std::move(entries), 0.25, 3);
    const auto segs = merge_stream(s);

    long boundaries = 0;
    for (std::size_t i = 1; i < s.entries.size(); ++i)
      if (s.entries[i].label != s.entries[i - 1].label) ++boundaries;
    CHECK(static_cast<long>(segs.size()) <= boundaries + 1);

    for (std::size_t i = 0; i < segs.size(); ++i) {
      CHECK(segs[i].start >= 0.0);
      CHECK(segs[i].end <=
            doctest::Approx(static_cast<double>(s.entries.size()) *
                            s.interval));
      if (i > 0 && segs[i - 1].label == segs[i].label)
        CHECK(segs[i].start > segs[i - 1].end - 1e-12);
      // confidence equals the max over the covered entries
      double expect = 0.0;
      const auto first = static_cast<std::size_t>(
          std::llround(segs[i].start / s.interval));
      const auto last = static_cast<std::size_t>(
          std::llround(segs[i].end / s.interval)) - 1;
      for (std::size_t k = first; k <= last; ++k)
        expect = std::max(expect, s.entries[k].confidence);
      CHECK(segs[i].confidence == expect);
    }
  }
}

TEST_CASE("localize assembles canonical prediction sets") {
  std::vector<IntervalStream> streams;
  streams.push_back(make_stream({{0, 0.7}, {0, 0.9}, {1, 0.5}, {2, 0.3},
                                 {0, 0.6}},
                                0.5, 2, "vid_b"));
  streams.push_back(make_stream({{2, 0.3}, {2, 0.4}}, 0.5, 2, "vid_a"));

  const auto p = localize(streams);
  REQUIRE(p.videos.size() == 2);
  CHECK(p.videos.count("vid_a") == 1);
  CHECK(p.videos.at("vid_a").empty());  // all-background video kept
  CHECK(p.videos.at("vid_b").size() == 3);

  CHECK(localize({}).videos.empty());
  CHECK(localize(streams) == localize_serial(streams));
}

TEST_CASE("localize rejects duplicate video ids") {
  std::vector<IntervalStream> streams;
  streams.push_back(make_stream({{0, 0.5}}, 0.5, 2, "v"));
  streams.push_back(make_stream({{1, 0.5}}, 0.5, 2, "v"));
  CHECK_THROWS_AS(localize(streams), InputError);
  CHECK_THROWS_AS(localize_serial(streams), InputError);
}

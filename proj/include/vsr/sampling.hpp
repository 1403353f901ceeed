#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vsr {

/// A video's identity and temporal extent. Sampling only ever needs these.
struct VideoMeta {
  std::string video_id;
  std::int64_t n_frames = 1;
  double fps = 1.0;

  double duration_s() const { return static_cast<double>(n_frames) / fps; }
  /// Throws InvalidArgument when n_frames < 1 or fps is not positive.
  void validate() const;
};

enum class SamplingStrategy { BinWise, FullyRandom, Uniform, SegmentUniform };

std::string_view to_string(SamplingStrategy s);
/// Accepts "binwise", "fully_random", "uniform", "segment_uniform" (case-insensitive).
SamplingStrategy parse_strategy(std::string_view s);

struct FrameSchedule {
  std::vector<std::int64_t> indices;  // ascending, may repeat for degenerate inputs
  SamplingStrategy strategy = SamplingStrategy::Uniform;
  std::uint64_t seed = 0;

  friend bool operator==(const FrameSchedule&, const FrameSchedule&) = default;
};

/// Half-open frame range [lo, hi) belonging to segment `index`.
struct Segment {
  int index = 0;
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  std::int64_t size() const { return hi - lo; }
  bool contains(std::int64_t frame) const { return frame >= lo && frame < hi; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Bounds of bin `b` when [0, n) is split into `k` bins: [⌊b·n/k⌋, ⌊(b+1)·n/k⌋).
Segment bin_bounds(std::int64_t n_frames, std::int64_t k, std::int64_t b);

/// One uniform draw per bin. Empty bins (n_frames < k) contribute their
/// clamped lower bound, so the output always has k entries.
FrameSchedule bin_wise_sample(const VideoMeta& meta, std::int64_t k, std::uint64_t seed);

/// k distinct frames without replacement. Throws InvalidArgument if k > n_frames.
FrameSchedule fully_random_sample(const VideoMeta& meta, std::int64_t k, std::uint64_t seed);

/// Midpoint placement: index j = ⌊(j + 0.5)·n_frames/k⌋.
FrameSchedule uniform_sample(const VideoMeta& meta, std::int64_t k);

/// T contiguous segments covering [0, n_frames) with sizes differing by at most one.
std::vector<Segment> split_segments(const VideoMeta& meta, int segment_count);

/// uniform_sample restricted to [seg.lo, seg.hi).
FrameSchedule segment_uniform_sample(const Segment& seg, std::int64_t k);

/// Dispatch for the per-sample prediction schedules. SegmentUniform is not
/// a valid choice here.
FrameSchedule sample_frames(SamplingStrategy strategy, const VideoMeta& meta, std::int64_t k,
                            std::uint64_t seed);

}  // namespace vsr

#include "vsr/sampling.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

#include "vsr/errors.hpp"
#include "vsr/rng.hpp"

namespace vsr {

void VideoMeta::validate() const {
  if (n_frames < 1) throw InvalidArgument("video " + video_id + ": n_frames must be >= 1");
  if (!(fps > 0.0) || !std::isfinite(fps))
    throw InvalidArgument("video " + video_id + ": fps must be positive");
}

std::string_view to_string(SamplingStrategy s) {
  switch (s) {
    case SamplingStrategy::BinWise: return "binwise";
    case SamplingStrategy::FullyRandom: return "fully_random";
    case SamplingStrategy::Uniform: return "uniform";
    case SamplingStrategy::SegmentUniform: return "segment_uniform";
  }
  return "?";
}

SamplingStrategy parse_strategy(std::string_view s) {
  std::string lower;
  for (char c : s) {
    if (c == '-' || c == ' ') c = '_';
    lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (lower == "binwise" || lower == "bin_wise") return SamplingStrategy::BinWise;
  if (lower == "fully_random" || lower == "fullyrandom" || lower == "random")
    return SamplingStrategy::FullyRandom;
  if (lower == "uniform") return SamplingStrategy::Uniform;
  if (lower == "segment_uniform" || lower == "segmentuniform") return SamplingStrategy::SegmentUniform;
  throw InvalidArgument("unknown sampling strategy: " + std::string(s));
}

namespace {

void require_k(std::int64_t k) {
  if (k < 1) throw InvalidArgument("frame count k must be >= 1");
}

// ⌊num·n/den⌋ without overflow for any realistic frame count.
std::int64_t scaled_floor(std::int64_t num, std::int64_t n, std::int64_t den) {
  return static_cast<std::int64_t>((static_cast<__int128>(num) * n) / den);
}

std::vector<std::int64_t> midpoints(std::int64_t lo, std::int64_t len, std::int64_t k) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(k));
  for (std::int64_t j = 0; j < k; ++j) out[j] = lo + scaled_floor(2 * j + 1, len, 2 * k);
  return out;
}

}  // namespace

Segment bin_bounds(std::int64_t n_frames, std::int64_t k, std::int64_t b) {
  return Segment{static_cast<int>(b), scaled_floor(b, n_frames, k), scaled_floor(b + 1, n_frames, k)};
}

FrameSchedule bin_wise_sample(const VideoMeta& meta, std::int64_t k, std::uint64_t seed) {
  meta.validate();
  require_k(k);
  Xoshiro256 rng(seed);
  FrameSchedule out{{}, SamplingStrategy::BinWise, seed};
  out.indices.reserve(static_cast<std::size_t>(k));
  for (std::int64_t b = 0; b < k; ++b) {
    const Segment bin = bin_bounds(meta.n_frames, k, b);
    if (bin.size() > 0) {
      out.indices.push_back(bin.lo + static_cast<std::int64_t>(rng.bounded(bin.size())));
    } else {
      out.indices.push_back(std::clamp<std::int64_t>(bin.lo, 0, meta.n_frames - 1));
    }
  }
  // Bins are ordered, so the draws already ascend.
  return out;
}

FrameSchedule fully_random_sample(const VideoMeta& meta, std::int64_t k, std::uint64_t seed) {
  meta.validate();
  require_k(k);
  if (k > meta.n_frames)
    throw InvalidArgument("fully random sampling of " + std::to_string(k) + " frames from " +
                          std::to_string(meta.n_frames) + " is impossible without replacement");
  // Floyd's subset algorithm: k draws, no rejection loop.
  Xoshiro256 rng(seed);
  std::unordered_set<std::int64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(k) * 2);
  for (std::int64_t j = meta.n_frames - k; j < meta.n_frames; ++j) {
    const auto t = static_cast<std::int64_t>(rng.bounded(static_cast<std::uint64_t>(j) + 1));
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  FrameSchedule out{{chosen.begin(), chosen.end()}, SamplingStrategy::FullyRandom, seed};
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

FrameSchedule uniform_sample(const VideoMeta& meta, std::int64_t k) {
  meta.validate();
  require_k(k);
  return FrameSchedule{midpoints(0, meta.n_frames, k), SamplingStrategy::Uniform, 0};
}

std::vector<Segment> split_segments(const VideoMeta& meta, int segment_count) {
  meta.validate();
  if (segment_count < 1) throw InvalidArgument("segment count must be >= 1");
  std::vector<Segment> out;
  out.reserve(static_cast<std::size_t>(segment_count));
  for (int t = 0; t < segment_count; ++t) out.push_back(bin_bounds(meta.n_frames, segment_count, t));
  return out;
}

FrameSchedule segment_uniform_sample(const Segment& seg, std::int64_t k) {
  require_k(k);
  if (seg.size() < 1) throw InvalidArgument("segment must be nonempty");
  return FrameSchedule{midpoints(seg.lo, seg.size(), k), SamplingStrategy::SegmentUniform, 0};
}

FrameSchedule sample_frames(SamplingStrategy strategy, const VideoMeta& meta, std::int64_t k,
                            std::uint64_t seed) {
  switch (strategy) {
    case SamplingStrategy::BinWise: return bin_wise_sample(meta, k, seed);
    case SamplingStrategy::FullyRandom: return fully_random_sample(meta, k, seed);
    case SamplingStrategy::Uniform: return uniform_sample(meta, k);
    case SamplingStrategy::SegmentUniform: break;
  }
  throw InvalidArgument("segment_uniform is not a prediction sampling strategy");
}

}  // namespace vsr

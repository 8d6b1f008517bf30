#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "masr/errors.hpp"
#include "masr/focus.hpp"

namespace masr {
namespace {

std::vector<Clip> unique_clips(std::span<const Clip> clips) {
  std::vector<Clip> out;
  for (const Clip& c : clips) {
    if (c.start > c.end) throw Error(ErrorKind::OutOfRange, "clip start after end");
    const bool seen = std::any_of(out.begin(), out.end(), [&](const Clip& o) { return o.same_span(c); });
    if (!seen) out.push_back(Clip{c.start, c.end, std::nullopt});
  }
  return out;
}

bool entry_order(const FocusEntry& a, const FocusEntry& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.frame_index < b.frame_index;
}

}  // namespace

void FocusParams::validate() const {
  if (k_v < 1 || k_f < 1 || k_c < 1) throw Error(ErrorKind::InvalidArgument, "k_v, k_f and k_c must be >= 1");
  if (k_f > k_c) throw Error(ErrorKind::InvalidArgument, "k_f must not exceed k_c");
}

std::vector<FrameIndex> FocusSet::frames() const {
  std::vector<FrameIndex> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.frame_index);
  return out;
}

FocusSet fine_focus(std::span<const Clip> candidate_clips, const FeatureLookup& frame_features,
                    const FeatureVector& query_feature, const FocusParams& params) {
  params.validate();
  if (candidate_clips.empty()) throw Error(ErrorKind::EmptyCandidates, "no candidate clips");
  const std::vector<Clip> clips = unique_clips(candidate_clips);

  std::set<FrameIndex> frames;
  for (const Clip& c : clips) {
    for (FrameIndex i = c.start; i <= c.end; ++i) frames.insert(i);
  }
  std::unordered_map<FrameIndex, double> sim;
  sim.reserve(frames.size());
  for (FrameIndex i : frames) {
    const FeatureVector* f = frame_features(i);
    if (f == nullptr) throw Error(ErrorKind::MissingFeature, "frame " + std::to_string(i) + " has no embedding");
    sim.emplace(i, cosine_similarity(*f, query_feature));
  }

  const auto frame_before = [&](FrameIndex a, FrameIndex b) {
    const double sa = sim.at(a), sb = sim.at(b);
    if (sa != sb) return sa > sb;
    return a < b;
  };
  std::vector<FrameIndex> ranked(frames.begin(), frames.end());
  std::sort(ranked.begin(), ranked.end(), frame_before);
  const std::unordered_set<FrameIndex> top(ranked.begin(),
                                           ranked.begin() + static_cast<std::ptrdiff_t>(
                                                                std::min(params.k_v, ranked.size())));

  struct ClipScore {
    std::size_t clip;
    std::size_t count;
    double best;
  };
  std::vector<ClipScore> scores;
  for (std::size_t ci = 0; ci < clips.size(); ++ci) {
    ClipScore s{ci, 0, -2.0};
    for (FrameIndex i = clips[ci].start; i <= clips[ci].end; ++i) {
      s.count += top.contains(i) ? 1 : 0;
      s.best = std::max(s.best, sim.at(i));
    }
    if (s.count > 0) scores.push_back(s);
  }
  std::sort(scores.begin(), scores.end(), [&](const ClipScore& a, const ClipScore& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.best != b.best) return a.best > b.best;
    if (clips[a.clip].start != clips[b.clip].start) return clips[a.clip].start < clips[b.clip].start;
    return clips[a.clip].end < clips[b.clip].end;
  });
  if (scores.size() > params.k_f) scores.resize(params.k_f);

  FocusSet out;
  std::unordered_set<FrameIndex> emitted;
  for (const ClipScore& s : scores) {
    const Clip& c = clips[s.clip];
    std::vector<FrameIndex> in_clip;
    for (FrameIndex i = c.start; i <= c.end; ++i) {
      if (!emitted.contains(i)) in_clip.push_back(i);
    }
    if (in_clip.empty()) continue;
    const FrameIndex best = *std::min_element(in_clip.begin(), in_clip.end(), frame_before);
    emitted.insert(best);
    out.entries.push_back(FocusEntry{Clip{c.start, c.end, best}, best, sim.at(best)});
  }
  std::sort(out.entries.begin(), out.entries.end(), entry_order);
  return out;
}

FocusSet focus_clip_midpoints(std::span<const Clip> candidate_clips, const FocusParams& params) {
  params.validate();
  if (candidate_clips.empty()) throw Error(ErrorKind::EmptyCandidates, "no candidate clips");
  const std::vector<Clip> clips = unique_clips(candidate_clips);
  FocusSet out;
  std::unordered_set<FrameIndex> emitted;
  for (std::size_t ci = 0; ci < clips.size() && ci < params.k_f; ++ci) {
    const Clip& c = clips[ci];
    const FrameIndex mid = c.start + (c.end - c.start) / 2;
    if (!emitted.insert(mid).second) continue;
    out.entries.push_back(FocusEntry{Clip{c.start, c.end, mid}, mid, 0.0});
  }
  std::sort(out.entries.begin(), out.entries.end(), entry_order);
  return out;
}

}  // namespace masr
